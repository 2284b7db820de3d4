//! Chaotic on/off schedules from the logistic map.
//!
//! Shows the raw orbit, its two-level quantization, the seeds the generator
//! refuses, and how per-load dwell times stretch one discrete sequence into
//! staggered continuous-time switch signals.

use nilm::chaos::{generate_sequence, validate_seed, SwitchSchedule};
use nilm::logistic_step;

fn main() -> nilm::Result<()> {
    // The raw orbit wanders over (0, 1) without ever repeating.
    let mut x = 0.123456789;
    print!("orbit from 0.123456789:");
    for _ in 0..8 {
        print!(" {x:.6}");
        x = logistic_step(x)?;
    }
    println!();

    // Quantizing at 1/2 turns the orbit into a switch schedule: values at or
    // below the midpoint become the standby constant K (OFF), the rest 1 (ON).
    let standby = 100.0;
    let sequence = generate_sequence(0.123456789, 10_000, standby)?;
    let picture: String = sequence.values()[..64]
        .iter()
        .map(|&v| if v == 1.0 { '#' } else { '.' })
        .collect();
    println!("first 64 switch values: {picture}");
    println!(
        "ON fraction over {} steps: {:.4} (the orbit splits its time almost \
         evenly across the midpoint)",
        sequence.len(),
        sequence.on_fraction()
    );

    // Seeds on the map's fixed points or their preimages would freeze the
    // schedule, so they are rejected outright.
    for seed in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let err = validate_seed(seed).unwrap_err();
        println!("seed {seed}: {err}");
    }

    // A dwell time per load dilates the shared sequence: load j holds value
    // r_n over [n tau_j, (n+1) tau_j). Different dwells decorrelate the
    // switching even though every load reads the same orbit.
    let taus = vec![0.15, 0.25];
    let schedule = SwitchSchedule::shared(generate_sequence(0.2, 40, standby)?, taus)?;
    println!("\ntwo loads reading one sequence through different dwells:");
    for load in 0..2 {
        print!("load {} (tau {:.2} s):", load + 1, schedule.taus()[load]);
        for step in 0..24 {
            let t = step as f64 * 0.05;
            let on = schedule.switch_value(load, t)? == 1.0;
            print!("{}", if on { '#' } else { '.' });
        }
        println!();
    }
    Ok(())
}
