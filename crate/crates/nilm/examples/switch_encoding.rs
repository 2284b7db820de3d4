//! Joint switch-state codec on the i_max / M grid.
//!
//! Each combination of M on/off bits maps to one scalar: the binary-weighted
//! bit sum scaled by i_max / M. Decoding snaps a noisy scalar back to the
//! nearest code. The round trip is exact, and decoding survives any
//! perturbation smaller than half the spacing between adjacent codes.

use nilm::encoding::{decode, encode, EncodingParams};

fn main() -> nilm::Result<()> {
    let params = EncodingParams::new(10.8, 4)?;
    println!(
        "M = 4 loads, i_max = {}, code spacing i_max / M = {}",
        params.i_max(),
        params.spacing()
    );

    println!("\n  bits      encoded s");
    for code in 0..16u32 {
        let bits: Vec<u8> = (0..4).map(|k| ((code >> k) & 1) as u8).collect();
        let s = encode(&bits, &params)?;
        let strip: String = bits.iter().map(|&b| if b == 1 { '#' } else { '.' }).collect();
        println!("  {strip}   {s:10.4}");
        assert_eq!(decode(s, &params)?, bits, "round trip is exact");
    }

    // Decoding tolerates anything below half a spacing.
    let bits = vec![1, 0, 1, 0];
    let s = encode(&bits, &params)?;
    let half = params.spacing() / 2.0;
    for noise in [0.3 * half, 0.9 * half, 1.2 * half] {
        let recovered = decode(s + noise, &params)?;
        println!(
            "s = {s:.3} + noise {noise:+.3} decodes to {:?}{}",
            recovered,
            if recovered == bits { "" } else { "  <- crossed the midpoint" }
        );
    }

    // Out-of-range scalars clamp to the nearest representable code.
    println!("s = -3.0 decodes to {:?} (all OFF)", decode(-3.0, &params)?);
    println!(
        "s = 99.0 decodes to {:?} (all ON)",
        decode(99.0, &params)?
    );
    Ok(())
}
