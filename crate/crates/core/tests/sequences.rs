use qmcis::sequences::{halton, radical_inverse, sobol, uniform_random};
use qmcis::SequenceKind;

const SOBOL_REFERENCE: &str = include_str!("data/sobol_reference_256x16.csv");

#[test]
fn sobol_matches_frozen_reference() {
    let rows: Vec<Vec<u64>> = SOBOL_REFERENCE
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 256);
    let points = sobol(256, 16).unwrap();
    for (i, (row, p)) in rows.iter().zip(points.iter()).enumerate() {
        for (j, (&want, &got)) in row.iter().zip(p).enumerate() {
            assert_eq!(
                got,
                want as f64 / 4294967296.0,
                "point {} coordinate {j}",
                i + 1
            );
        }
    }
}

#[test]
fn sobol_prefixes_agree_across_dimensions() {
    let wide = sobol(100, 16).unwrap();
    let narrow = sobol(100, 5).unwrap();
    for (a, b) in wide.iter().zip(narrow.iter()) {
        assert_eq!(&a[..5], b);
    }
}

#[test]
fn sobol_powers_of_two_are_stratified() {
    // every dyadic interval of length 2^-7 in each coordinate holds one of
    // the first 127 points or is the one left empty by the skipped origin
    let p = sobol(127, 16).unwrap();
    for j in 0..16 {
        let mut hits = [0u32; 128];
        for x in p.iter() {
            hits[(x[j] * 128.0) as usize] += 1;
        }
        assert_eq!(hits[0], 0);
        assert!(hits[1..].iter().all(|&h| h == 1), "coordinate {j}");
    }
}

#[test]
fn halton_by_hand() {
    let p = halton(4, 2).unwrap();
    let want = [
        [0.5, 1.0 / 3.0],
        [0.25, 2.0 / 3.0],
        [0.75, 1.0 / 9.0],
        [0.125, 4.0 / 9.0],
    ];
    for (x, w) in p.iter().zip(want) {
        assert!((x[0] - w[0]).abs() < 1e-16 && (x[1] - w[1]).abs() < 1e-16);
    }
    assert_eq!(radical_inverse(1_000_000, 10), 1e-7);
}

#[test]
fn kinds_generate_the_named_sequences() {
    assert_eq!(
        SequenceKind::Halton.generate(9, 3, 0).unwrap(),
        halton(9, 3).unwrap()
    );
    assert_eq!(
        SequenceKind::Sobol.generate(9, 3, 0).unwrap(),
        sobol(9, 3).unwrap()
    );
    assert_eq!(
        SequenceKind::Uniform.generate(9, 3, 5).unwrap(),
        uniform_random(9, 3, 5).unwrap()
    );
    assert_ne!(
        uniform_random(9, 3, 5).unwrap(),
        uniform_random(9, 3, 6).unwrap()
    );
}
