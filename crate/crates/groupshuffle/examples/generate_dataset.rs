//! Generate the synthetic clustered dataset and inspect its structure:
//! two well-separated clusters, two interleaved crescents per cluster, and
//! light/dark shades along each arc (8 labels total).
//!
//! Run with: cargo run --example generate_dataset

use groupshuffle::data::{generate_syn, write_csv};
use groupshuffle::AuxInfo;

fn main() -> groupshuffle::Result<()> {
    let n = 4000;
    let dataset = generate_syn(n, 7)?;

    let mut counts = [0usize; 8];
    for &label in &dataset.x {
        counts[label] += 1;
    }
    println!("label counts: {counts:?}");

    let points = match &dataset.aux {
        AuxInfo::Points(p) => p,
        AuxInfo::Graph(_) => unreachable!("generator emits coordinates"),
    };
    for cluster in 0..2 {
        let (mut cx, mut cy, mut c) = (0.0, 0.0, 0usize);
        for (p, &label) in points.iter().zip(&dataset.x) {
            if label >> 2 == cluster {
                cx += p[0];
                cy += p[1];
                c += 1;
            }
        }
        println!(
            "cluster {cluster}: {c} records, centroid ({:.2}, {:.2})",
            cx / c as f64,
            cy / c as f64
        );
    }

    let out = std::env::temp_dir().join("syn_example.csv");
    write_csv(&dataset, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
