//! Synthetic trip logs shaped like the Ocslab KIA Soul export.

#![allow(dead_code)]

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CHANNELS: [&str; 15] = [
    "Long_Term_Fuel_Trim_Bank1",
    "Intake_air_pressure",
    "Accelerator_Pedal_value",
    "Fuel_consumption",
    "Maximum_indicated_engine_torque",
    "Engine_torque",
    "Calculated_LOAD_value",
    "Torque_of_friction",
    "Activation_of_Air_compressor",
    "Engine_coolant_temperature",
    "Engine_coolant_temperature.1",
    "Wheel_velocity_front_left-hand",
    "Wheel_velocity_front_right-hand",
    "Wheel_velocity_rear_left-hand",
    "Torque_converter_speed",
];

/// One contiguous trip of `rows` samples per driver. Every channel drifts
/// around a level set by the (driver, channel) pair; a constant channel and an exact copy of
/// `Engine_torque` are included so feature selection has something to drop.
pub fn trip_log(drivers: &[&str], rows: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = String::from("Time(s),");
    for c in CHANNELS {
        s += c;
        s.push(',');
    }
    s += "Flat_sensor,Correction_of_engine_torque,PathOrder,Class\n";
    let mut t = 0usize;
    for (di, driver) in drivers.iter().enumerate() {
        for r in 0..rows {
            t += 1;
            write!(s, "{t},").unwrap();
            let mut torque = 0.0;
            for (ci, _) in CHANNELS.iter().enumerate() {
                let base = 10.0 * (ci as f64 + 1.0) + ((di * 7 + ci * 3) % 5) as f64 * 1.5;
                let wave = ((r as f64) / 7.0 + ci as f64).sin();
                let v = base + wave + rng.gen_range(-0.4..0.4);
                if ci == 5 {
                    torque = v;
                }
                write!(s, "{v},").unwrap();
            }
            writeln!(s, "5,{torque},{},{driver}", r % 4 + 1).unwrap();
        }
    }
    s
}

/// Writes `contents` into a fresh temporary directory.
pub fn write_temp(name: &str, contents: &str) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join(name);
    std::fs::write(&p, contents).unwrap();
    (dir, p)
}
