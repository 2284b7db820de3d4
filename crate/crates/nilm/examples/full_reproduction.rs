//! The complete experiment at reference settings: simulate the four-load
//! network, train the kernel Adaline on the first 1350 RMS samples, evaluate
//! on the held-out 650, and print the report. Takes a few seconds.

use std::time::Instant;

use nilm::pipeline::run_all;
use nilm::PipelineConfig;

fn main() -> nilm::Result<()> {
    let dir = tempfile::tempdir()?;
    let config = PipelineConfig::default();
    println!(
        "simulating {:.2} s of network time at dt = {:.3e} s ({} RK4 steps)...",
        config.network.t_end,
        config.network.dt,
        config.network.total_steps()
    );

    let started = Instant::now();
    let summary = run_all(&config, dir.path())?;
    let elapsed = started.elapsed();

    for load in &summary.simulate.loads {
        println!(
            "load dwell {:.2} s: {} toggles, ON {:.1}% of samples",
            load.tau,
            load.toggles,
            100.0 * load.on_fraction
        );
    }
    println!();
    println!("{}", summary.eval.report.render());
    println!("wall time: {:.2} s", elapsed.as_secs_f64());
    Ok(())
}
