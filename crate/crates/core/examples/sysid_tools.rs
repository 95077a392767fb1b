//! Bench identification on the shipped sample traces.

use std::path::Path;

use perchlab::sysid::{
    compensate_pwm, estimate_inertia, fit_thrust_voltage, fit_time_constant, read_gyro_csv, read_tachometer_csv,
    read_thrust_stand_csv, Direction, PendulumSetup, PWM_MAX,
};

fn main() -> perchlab::error::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sysid");

    let setup = PendulumSetup { mass: 0.030, string_separation: 0.07, string_length: 0.5 };
    let est = estimate_inertia(&setup, &read_gyro_csv(&data.join("gyro.csv"))?)?;
    println!("inertia {:.3e} kg·m² from period {:.4} s", est.inertia, est.period_avg);

    let fit = fit_thrust_voltage(&read_thrust_stand_csv(&data.join("thrust_stand.csv"), PWM_MAX)?)?;
    println!("low region  {:?}", fit.params.low);
    println!("high region {:?}", fit.params.high);
    for v in [4.2, 3.9, 3.6] {
        let cmd = compensate_pwm(&fit.params, 8.0, v)?;
        println!("8 gf at {v} V -> PWM {}{}", cmd.counts(), if cmd.clamped { " (clamped)" } else { "" });
    }

    let trace = read_tachometer_csv(&data.join("tachometer.csv"), 2.4e-10)?;
    let tc = fit_time_constant(&trace, Direction::Down)?;
    println!("spin-down time constant {:.4} s (R² {:.4})", tc.tau, tc.r_squared);
    Ok(())
}
