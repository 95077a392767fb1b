//! Pitch range at which each leg design can reach the ceiling with all four feet.

use perchlab::legs::{impact_window, LegConfig};
use perchlab::sim::QuadParams;

fn main() {
    let p = QuadParams::default();
    for legs in LegConfig::all_presets() {
        let w = impact_window(&legs, &p);
        match w.bounds {
            Some((lo, hi)) => println!("{:<18} {lo:6.1} .. {hi:6.1} deg (width {:.1})", legs.name, w.width()),
            None => println!("{:<18} empty", legs.name),
        }
    }
}
