use capa::runner::*;
fn main() {
    let dir = std::path::Path::new("/tmp/fig-probe");
    let _ = std::fs::remove_dir_all(dir);
    run_reproduce(Figure::Fig6, dir, 20240607, 20000).unwrap();
    for name in ["outage-probability_spda-half_montecarlo.csv", "outage-probability_spda-one_montecarlo.csv", "outage-probability_spda-half_closed.csv", "outage-probability_spda-one_closed.csv"] {
        let t = std::fs::read_to_string(dir.join("fig6/miso").join(name)).unwrap();
        println!("== {name}\n{t}");
    }
}
