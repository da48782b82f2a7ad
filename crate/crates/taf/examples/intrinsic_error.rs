//! First-order error of approximating amplitude by pulse width, as a table
//! over the minimum pulse fraction and frequency. The error vanishes at DC
//! and for full-width pulses, and grows toward the band edge as the smallest
//! pulse narrows.
//!
//! ```bash
//! cargo run --example intrinsic_error
//! ```

use taf::spectral::intrinsic_error_db;

fn main() {
    let tap_interval = 1.0;
    let freqs = [0.05, 0.1, 0.2, 0.3, 0.4, 0.45];

    print!("{:>8}", "a_min");
    for f in freqs {
        print!("{:>10}", format!("{f} Hz"));
    }
    println!();

    for ai in (1..=10).rev() {
        let a_min = ai as f64 / 10.0;
        print!("{a_min:>8.1}");
        for f in freqs {
            let err = intrinsic_error_db(a_min, tap_interval, f).unwrap();
            print!("{err:>10.3}");
        }
        println!();
    }
    println!("\nvalues in dB; tap interval {tap_interval} s");
}
