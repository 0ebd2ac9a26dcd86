//! Long-range gate error against qubit separation from a single calibration point.

use rydmol::constants::{mhz, us};
use rydmol::model::ProtocolKind;
use rydmol::scaling::{longrange_error_vs_distance, write_distance_csv, DistanceScanSpec};

fn main() -> rydmol::Result<()> {
    // V_rR and V_rr at 10 μm; replace with values for the states in use.
    let (c3, c6) = DistanceScanSpec::calibrate(10e-6, mhz(32.3), mhz(0.115))?;
    let mut spec = DistanceScanSpec {
        c3_rR: c3,
        c6_rr: c6,
        x_values: (4..=30).map(|x| x as f64 * 1e-6).collect(),
        t1: us(0.3),
        t2: us(0.3),
        v_dd_fixed: 2.0 * mhz(9.5),
        gamma_r: 1.0 / us(97.0),
        gamma_R: 1.0 / us(126.0),
    };
    println!("# two atoms");
    write_distance_csv(&longrange_error_vs_distance(&spec, ProtocolKind::CzTwoAtom)?, ProtocolKind::CzTwoAtom, std::io::stdout().lock())?;
    spec.t2 = us(0.1);
    println!("# three atoms");
    write_distance_csv(&longrange_error_vs_distance(&spec, ProtocolKind::CzThreeAtom)?, ProtocolKind::CzThreeAtom, std::io::stdout().lock())?;
    Ok(())
}
