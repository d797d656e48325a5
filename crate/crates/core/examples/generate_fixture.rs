//! Regenerates `fixtures/average_query_collection.csv`.
//!
//! The collection has 100 members of the 3-simplex with every entry at
//! least 0.05. Entries are whole multiples of 1e-6 so the average is exact
//! in decimal: member 0 is (0.1, 0.1, 0.8), then 49 pairs mirrored around
//! (0.333, 0.334, 0.333) and one balancing member, for an average of
//! (0.331, 0.332, 0.337).
//!
//! Run with `cargo run -p dirichlet-core --example generate_fixture`.

use std::fs::File;
use std::path::Path;

use dirichlet_core::empirical::write_collection_csv;
use dirichlet_core::{Collection, RngSeed, SimplexVector};
use rand::Rng;

const UNIT: i64 = 1_000_000;
const CENTER: [i64; 3] = [333_000, 334_000, 333_000];
const FIRST: [i64; 3] = [100_000, 100_000, 800_000];
const LAST: [i64; 3] = [366_000, 368_000, 266_000];
const SPREAD: i64 = 250_000;

fn vector(micro: [i64; 3]) -> SimplexVector {
    assert_eq!(micro.iter().sum::<i64>(), UNIT);
    SimplexVector::new(micro.iter().map(|&v| v as f64 / UNIT as f64).collect()).unwrap()
}

fn main() {
    let mut rng = RngSeed::new(20_240_601, 0).rng();
    let mut members = vec![vector(FIRST)];
    while members.len() < 99 {
        let d0 = rng.random_range(-SPREAD..=SPREAD);
        let d1 = rng.random_range(-SPREAD..=SPREAD);
        let d2 = -d0 - d1;
        if d2.abs() > SPREAD {
            continue;
        }
        let d = [d0, d1, d2];
        members.push(vector(std::array::from_fn(|i| CENTER[i] + d[i])));
        members.push(vector(std::array::from_fn(|i| CENTER[i] - d[i])));
    }
    members.push(vector(LAST));
    let c = Collection::new(members).unwrap();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/average_query_collection.csv");
    write_collection_csv(File::create(&path).unwrap(), &c).unwrap();
    println!("wrote {} members to {}", c.len(), path.display());
}
