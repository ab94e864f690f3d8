//! Input profiles: CSV ingestion with linear resampling onto the grid, and
//! deterministic synthetic stand-ins (diurnal double-peak load, seeded
//! smooth wind). Generator formulas are documented in the README.

use anyhow::{bail, Context, Result};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use std::path::Path;

/// Read a `time_index,power_kw` CSV and resample it onto the grid.
/// `time_index` is minutes from grid start; rows must be strictly
/// increasing and cover the whole grid span.
pub fn load_profile_csv(path: &Path, steps: usize, step_minutes: f64) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening profile {}", path.display()))?;
    {
        let headers = reader.headers().context("reading profile header")?;
        let cols: Vec<&str> = headers.iter().collect();
        if cols != ["time_index", "power_kw"] {
            bail!("profile {}: expected header `time_index,power_kw`, found {:?}", path.display(), cols);
        }
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // header is row 1
        let record = record.with_context(|| format!("profile {} row {row}", path.display()))?;
        if record.len() != 2 {
            bail!("profile {} row {row}: expected 2 fields, found {}", path.display(), record.len());
        }
        let t: f64 = record[0]
            .parse()
            .with_context(|| format!("profile {} row {row}: bad time_index {:?}", path.display(), &record[0]))?;
        let p: f64 = record[1]
            .parse()
            .with_context(|| format!("profile {} row {row}: bad power_kw {:?}", path.display(), &record[1]))?;
        if p < 0.0 {
            bail!("profile {} row {row}: negative power {p}", path.display());
        }
        if let Some((last, _)) = points.last() {
            if t <= *last {
                bail!("profile {} row {row}: time_index must be strictly increasing", path.display());
            }
        }
        points.push((t, p));
    }
    if points.len() < 2 && points.len() < steps {
        bail!("profile {}: needs at least 2 rows (or one per grid step), found {}", path.display(), points.len());
    }
    let span_end = (steps - 1) as f64 * step_minutes;
    if points[0].0 > 0.0 || points.last().unwrap().0 < span_end {
        bail!(
            "profile {}: rows cover [{}, {}] min but the grid needs [0, {span_end}] min",
            path.display(),
            points[0].0,
            points.last().unwrap().0
        );
    }
    let mut out = Vec::with_capacity(steps);
    let mut j = 0usize;
    for s in 0..steps {
        let t = s as f64 * step_minutes;
        while j + 1 < points.len() && points[j + 1].0 < t {
            j += 1;
        }
        let (t0, p0) = points[j];
        if (t - t0).abs() < 1e-9 {
            out.push(p0);
            continue;
        }
        let (t1, p1) = points[j + 1];
        let w = (t - t0) / (t1 - t0);
        out.push(p0 + w * (p1 - p0));
    }
    Ok(out)
}

fn gauss(x: f64, mu: f64, width: f64) -> f64 {
    let d = (x - mu) / width;
    (-d * d).exp()
}

/// Deterministic diurnal double-peak load shape, normalized so its maximum
/// over the grid equals `peak_kw`. `start_minutes` is the clock time of
/// step 0.
pub fn synth_load(peak_kw: f64, steps: usize, step_minutes: f64, start_minutes: f64) -> Vec<f64> {
    let shape = |clock: f64| -> f64 {
        let m = clock.rem_euclid(1440.0);
        // Base plus a broad daytime hump and morning (07:30) / evening
        // (18:00) peaks; the evening peak dominates, nights are low.
        0.42 + 0.5 * gauss(m, 450.0, 110.0) + 0.62 * gauss(m, 1080.0, 140.0) + 0.2 * gauss(m, 840.0, 260.0)
    };
    let raw: Vec<f64> = (0..steps).map(|s| shape(start_minutes + s as f64 * step_minutes)).collect();
    let max = raw.iter().cloned().fold(f64::MIN, f64::max);
    raw.into_iter().map(|v| v / max * peak_kw).collect()
}

/// Seeded smooth wind series clamped to [0, peak]: a small floor, a midday
/// (sea-breeze) hump, and two sinusoids with random phases (periods 16 h
/// and 6 h). `start_minutes` is the clock time of step 0.
pub fn synth_wind(
    peak_kw: f64,
    steps: usize,
    step_minutes: f64,
    start_minutes: f64,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phase = || fmbc_core::forecast::uniform_open01(&mut rng) * core::f64::consts::TAU;
    let (p1, p2) = (phase(), phase());
    (0..steps)
        .map(|s| {
            let m = s as f64 * step_minutes;
            let clock = (start_minutes + m).rem_euclid(1440.0);
            let v = 0.15
                + 0.55 * gauss(clock, 780.0, 220.0)
                + 0.06 * (core::f64::consts::TAU * m / 960.0 + p1).sin()
                + 0.04 * (core::f64::consts::TAU * m / 360.0 + p2).sin();
            v.clamp(0.0, 1.0) * peak_kw
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn constant_profile() {
        let f = write_csv("time_index,power_kw\n0,350\n20,350\n");
        let p = load_profile_csv(f.path(), 5, 5.0).unwrap();
        assert_eq!(p, vec![350.0; 5]);
    }

    #[test]
    fn resamples_15min_onto_5min() {
        let f = write_csv("time_index,power_kw\n0,30\n15,60\n30,30\n");
        let p = load_profile_csv(f.path(), 7, 5.0).unwrap();
        // Endpoints preserved, interior linear.
        assert_eq!(p[0], 30.0);
        assert_eq!(p[3], 60.0);
        assert_eq!(p[6], 30.0);
        assert!((p[1] - 40.0).abs() < 1e-12);
        assert!((p[5] - 40.0).abs() < 1e-12);
    }

    #[test]
    fn errors_carry_row_numbers() {
        let f = write_csv("time_index,power_kw\n0,100\n5,-3\n");
        let err = format!("{:#}", load_profile_csv(f.path(), 2, 5.0).unwrap_err());
        assert!(err.contains("row 3"), "{err}");

        let f = write_csv("time_index,power_kw\n0,100\n5,abc\n");
        let err = format!("{:#}", load_profile_csv(f.path(), 2, 5.0).unwrap_err());
        assert!(err.contains("row 3") && err.contains("power_kw"), "{err}");

        let f = write_csv("idx,kw\n0,1\n");
        let err = format!("{:#}", load_profile_csv(f.path(), 1, 5.0).unwrap_err());
        assert!(err.contains("header"), "{err}");
    }

    #[test]
    fn rejects_short_coverage() {
        let f = write_csv("time_index,power_kw\n0,100\n5,100\n");
        assert!(load_profile_csv(f.path(), 10, 5.0).is_err());
    }

    #[test]
    fn synth_load_hits_peak() {
        let p = synth_load(350.0, 288, 5.0, 1260.0);
        let max = p.iter().cloned().fold(f64::MIN, f64::max);
        assert!((max - 350.0).abs() < 1e-9);
        assert!(p.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn synth_wind_bounded_and_deterministic() {
        let w1 = synth_wind(500.0, 288, 5.0, 1260.0, 7);
        let w2 = synth_wind(500.0, 288, 5.0, 1260.0, 7);
        assert_eq!(w1, w2);
        assert!(w1.iter().all(|v| (0.0..=500.0).contains(v)));
        assert_ne!(w1, synth_wind(500.0, 288, 5.0, 1260.0, 8));
    }
}
