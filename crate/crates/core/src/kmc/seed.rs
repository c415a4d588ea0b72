/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `r` under `base`.
pub fn replica_seed(base: u64, replica: u64) -> u64 {
    mix(mix(base) ^ replica.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// `count` logarithmically spaced times from `t_min` to `t_max` inclusive.
pub fn log_grid(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max >= t_min, "log grid needs 0 < t_min <= t_max");
    match count {
        0 => Vec::new(),
        1 => vec![t_max],
        _ => {
            let (a, b) = (t_min.ln(), t_max.ln());
            let mut grid: Vec<f64> = (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect();
            grid[0] = t_min;
            grid[count - 1] = t_max;
            grid
        }
    }
}
