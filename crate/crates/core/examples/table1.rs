//! Marker populations for the twelve N = 4 π-pulse configurations.

use ifm_noise::experiment::table1::round3;
use ifm_noise::experiment::table1;

fn main() -> ifm_noise::Result<()> {
    println!("{:<18} {:>8} {:>8}", "thetas", "cIFM p0", "pIFM p0");
    for row in table1()? {
        println!("{:<18} {:>8} {:>8}", row.label, round3(row.cifm), round3(row.pifm));
    }
    Ok(())
}
