//! Synchronization measurement: Gaussian smoothing of the spike raster into
//! a mean-field activity series, power-spectrum analysis of that series, and
//! extraction of S — the power of the dominant non-DC frequency component.
//!
//! The smoothing kernel is `y = e^{-(x/10)^2}` sampled at integer
//! millisecond offsets over a 30 ms window (31 taps, -15..=+15). Convolution
//! truncates at the series boundaries: no padding and no wraparound, so the
//! spectrum is never fed fabricated data. Summation across units and
//! convolution commute, so the implementation convolves the per-tick spike
//! counts directly.

use std::io::{BufRead, Write};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::Error;
use crate::simulate::{parse_run_meta, spike_counts, RunMeta, SpikeRaster};
use crate::Result;

/// Half-width of the default 30 ms smoothing window, in ticks.
pub const KERNEL_RADIUS: usize = 15;

/// Summed smoothed activity per tick, in units of "kernel mass".
pub type MeanFieldSeries = Vec<f64>;

/// The smoothing kernel, evaluated at an offset of `x` ms.
pub fn kernel(x: f64) -> f64 {
    (-(x / 10.0) * (x / 10.0)).exp()
}

/// Kernel samples at integer offsets `-radius ..= +radius`.
pub fn kernel_taps(radius: usize) -> Vec<f64> {
    (-(radius as i64)..=radius as i64)
        .map(|x| kernel(x as f64))
        .collect()
}

/// Convolve a per-tick spike-count histogram with the kernel of the given
/// half-width, truncating at the boundaries.
pub fn convolve_counts(counts: &[u32], radius: usize) -> MeanFieldSeries {
    let taps = kernel_taps(radius);
    let len = counts.len() as i64;
    let r = radius as i64;
    (0..len)
        .map(|t| {
            let mut acc = 0.0;
            for off in -r..=r {
                let src = t - off;
                if src >= 0 && src < len {
                    acc += counts[src as usize] as f64 * taps[(off + r) as usize];
                }
            }
            acc
        })
        .collect()
}

/// Smooth a raster into the mean-field activity series with the default
/// 30 ms window.
pub fn convolve_and_sum(raster: &SpikeRaster, duration: u32) -> MeanFieldSeries {
    convolve_counts(&spike_counts(raster, duration), KERNEL_RADIUS)
}

/// The synchronization measure of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncMeasure {
    /// Power of the dominant non-DC frequency component.
    pub s: f64,
    /// Frequency of that component in Hz; absent when the series carries no
    /// oscillation at all (constant input).
    pub dominant_freq_hz: Option<f64>,
}

/// Power-spectrum synchronization measure.
///
/// Computes the full-length discrete Fourier transform of the series, takes
/// squared magnitudes, drops the DC term, and scans the one-sided bins
/// `1..=len/2` for the maximum power. Ties break toward the lower frequency.
/// Bin `k` maps to `k * 1000 / len` Hz at the 1 kHz tick rate. A constant
/// series has no non-DC structure and yields S = 0 with no frequency.
pub fn sync_measure(series: &[f64]) -> Result<SyncMeasure> {
    let len = series.len();
    if len < 2 {
        return Err(Error::config(format!(
            "series of length {len} has no non-DC spectrum"
        )));
    }
    let first = series[0];
    if series.iter().all(|&v| v == first) {
        return Ok(SyncMeasure {
            s: 0.0,
            dominant_freq_hz: None,
        });
    }

    let mut buf: Vec<Complex<f64>> = series.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);

    let mut best_bin = 0usize;
    let mut best_power = f64::NEG_INFINITY;
    for (bin, value) in buf.iter().enumerate().take(len / 2 + 1).skip(1) {
        let power = value.norm_sqr();
        if power > best_power {
            best_power = power;
            best_bin = bin;
        }
    }
    Ok(SyncMeasure {
        s: best_power,
        dominant_freq_hz: Some(best_bin as f64 * 1000.0 / len as f64),
    })
}

/// Divide every value by the global maximum, mapping the list into [0, 1]
/// with the maximum at exactly 1. An all-zero input cannot be normalized;
/// it is returned unchanged with the degenerate flag set.
pub fn normalize_s(values: &[f64]) -> (Vec<f64>, bool) {
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return (values.to_vec(), true);
    }
    (values.iter().map(|&v| v / max).collect(), false)
}

/// Write a mean-field (or any per-tick) series: the shared run header, then
/// one value per line.
pub fn write_series<W: Write>(meta: &RunMeta, series: &[f64], mut out: W) -> Result<()> {
    writeln!(
        out,
        "{} {} {} {} {}",
        meta.n, meta.duration, meta.seed, meta.p, meta.delay_enabled
    )?;
    for v in series {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

/// Read a series written by [`write_series`].
pub fn read_series<R: BufRead>(input: R) -> Result<(RunMeta, MeanFieldSeries)> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(Error::parse(1, "empty series file")),
    };
    let meta = parse_run_meta(&header, 1)?;
    let mut series = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("bad value: {line:?}")))?;
        series.push(v);
    }
    Ok((meta, series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::SpikeEvent;
    use rand::Rng;

    fn meta(n: usize, duration: u32) -> RunMeta {
        RunMeta {
            n,
            duration,
            seed: 0,
            p: 0.0,
            delay_enabled: false,
        }
    }

    fn raster_from(events: Vec<(u32, u32)>, n: usize, duration: u32) -> SpikeRaster {
        SpikeRaster {
            meta: meta(n, duration),
            events: events
                .into_iter()
                .map(|(tick, unit)| SpikeEvent { tick, unit })
                .collect(),
        }
    }

    #[test]
    fn kernel_anchor_values() {
        assert_eq!(kernel(0.0), 1.0);
        assert!((kernel(10.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((kernel(-10.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((kernel(15.0) - (-2.25f64).exp()).abs() < 1e-15);
        assert!((kernel(15.0) - 0.1054).abs() < 1e-4);
    }

    #[test]
    fn default_window_has_31_taps() {
        let taps = kernel_taps(KERNEL_RADIUS);
        assert_eq!(taps.len(), 31);
        assert_eq!(taps[KERNEL_RADIUS], 1.0);
        assert_eq!(taps[0], taps[30]);
    }

    #[test]
    fn empty_raster_gives_zero_series() {
        let series = convolve_and_sum(&raster_from(vec![], 10, 50), 50);
        assert_eq!(series, vec![0.0; 50]);
    }

    #[test]
    fn single_spike_reproduces_the_kernel() {
        let series = convolve_and_sum(&raster_from(vec![(100, 3)], 10, 200), 200);
        for (t, &v) in series.iter().enumerate() {
            let off = t as f64 - 100.0;
            if off.abs() <= 15.0 {
                assert!((v - kernel(off)).abs() < 1e-15, "tick {t}");
            } else {
                assert_eq!(v, 0.0, "tick {t}");
            }
        }
    }

    #[test]
    fn convolution_matches_per_unit_brute_force() {
        // The smoothing is defined per unit: convolve each 0/1 train
        // separately, then sum across units. The implementation convolves
        // the summed counts; the two must agree to near machine precision.
        let mut rng = crate::rng::stream(99, crate::rng::Stream::Thalamic);
        let n = 20usize;
        let duration = 300u32;
        let mut events = Vec::new();
        let mut trains = vec![vec![0.0f64; duration as usize]; n];
        while events.len() < 50 {
            let tick = rng.gen_range(0..duration);
            let unit = rng.gen_range(0..n as u32);
            if trains[unit as usize][tick as usize] == 0.0 {
                trains[unit as usize][tick as usize] = 1.0;
                events.push((tick, unit));
            }
        }
        let mut expected = vec![0.0f64; duration as usize];
        for train in &trains {
            for t in 0..duration as i64 {
                let mut acc = 0.0;
                for off in -15i64..=15 {
                    let src = t - off;
                    if src >= 0 && src < duration as i64 {
                        acc += train[src as usize] * kernel(off as f64);
                    }
                }
                expected[t as usize] += acc;
            }
        }
        let series = convolve_and_sum(&raster_from(events, n, duration), duration);
        for (a, b) in series.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_is_linear_over_disjoint_rasters() {
        let a = raster_from(vec![(10, 0), (40, 1)], 5, 100);
        let b = raster_from(vec![(70, 2)], 5, 100);
        let mut union = a.clone();
        union.events.extend(b.events.iter().copied());
        let sa = convolve_and_sum(&a, 100);
        let sb = convolve_and_sum(&b, 100);
        let su = convolve_and_sum(&union, 100);
        for i in 0..100 {
            assert!((su[i] - (sa[i] + sb[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn total_mass_is_bounded_by_kernel_mass() {
        let tap_mass: f64 = kernel_taps(KERNEL_RADIUS).iter().sum();
        // Interior spikes: equality.
        let interior = raster_from(vec![(50, 0), (30, 1), (60, 0)], 5, 100);
        let total: f64 = convolve_and_sum(&interior, 100).iter().sum();
        assert!((total - 3.0 * tap_mass).abs() < 1e-9);
        // A spike hugging the boundary loses part of its mass.
        let edge = raster_from(vec![(2, 0)], 5, 100);
        let total: f64 = convolve_and_sum(&edge, 100).iter().sum();
        assert!(total < tap_mass);
        assert!(total > 0.0);
    }

    #[test]
    fn single_tone_lands_on_its_exact_bin() {
        for (freq, len) in [(10.0, 2000usize), (6.0, 1000), (25.0, 400)] {
            let series: Vec<f64> = (0..len)
                .map(|t| (2.0 * std::f64::consts::PI * freq * t as f64 / 1000.0).cos())
                .collect();
            let m = sync_measure(&series).unwrap();
            assert_eq!(m.dominant_freq_hz, Some(freq));
            assert!(m.s > 0.0);
        }
    }

    #[test]
    fn constant_series_has_no_oscillation() {
        let m = sync_measure(&vec![7.25; 500]).unwrap();
        assert_eq!(m.s, 0.0);
        assert_eq!(m.dominant_freq_hz, None);
        let m = sync_measure(&vec![0.0; 500]).unwrap();
        assert_eq!(m.s, 0.0);
        assert_eq!(m.dominant_freq_hz, None);
    }

    #[test]
    fn flat_spectrum_ties_break_toward_lower_frequency() {
        // A unit impulse has equal power in every bin.
        let mut series = vec![0.0; 8];
        series[0] = 1.0;
        let m = sync_measure(&series).unwrap();
        assert_eq!(m.dominant_freq_hz, Some(125.0));
    }

    #[test]
    fn short_series_is_rejected() {
        assert!(sync_measure(&[1.0]).is_err());
        assert!(sync_measure(&[]).is_err());
    }

    #[test]
    fn parseval_identity_holds_for_non_dc_power() {
        let mut rng = crate::rng::stream(7, crate::rng::Stream::Thalamic);
        let len = 1024usize;
        let series: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() * 10.0).collect();
        let mean = series.iter().sum::<f64>() / len as f64;
        let sum_sq_dev: f64 = series.iter().map(|v| (v - mean) * (v - mean)).sum();

        let mut buf: Vec<Complex<f64>> = series.iter().map(|&v| Complex::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(len).process(&mut buf);
        let non_dc: f64 = buf.iter().skip(1).map(|c| c.norm_sqr()).sum();

        // Unnormalized transform: sum of two-sided non-DC power equals
        // len * sum of squared deviations from the mean.
        let expected = len as f64 * sum_sq_dev;
        assert!((non_dc - expected).abs() / expected < 1e-6);
    }

    #[test]
    fn normalization_examples() {
        let (out, degenerate) = normalize_s(&[2.0, 4.0, 8.0]);
        assert_eq!(out, vec![0.25, 0.5, 1.0]);
        assert!(!degenerate);

        let (out, degenerate) = normalize_s(&[5.0]);
        assert_eq!(out, vec![1.0]);
        assert!(!degenerate);

        let (out, degenerate) = normalize_s(&[0.0, 0.0]);
        assert_eq!(out, vec![0.0, 0.0]);
        assert!(degenerate);
    }

    #[test]
    fn normalized_maximum_is_exactly_one() {
        let values = [3.7e11, 1.2e10, 9.9e11, 4.0e8];
        let (out, _) = normalize_s(&values);
        assert_eq!(out.iter().cloned().fold(0.0f64, f64::max), 1.0);
    }

    #[test]
    fn series_round_trips() {
        let m = meta(100, 5);
        let series = vec![0.0, 1.5, 2.25e11, -3.0, 0.1054];
        let mut buf = Vec::new();
        write_series(&m, &series, &mut buf).unwrap();
        let (back_meta, back) = read_series(buf.as_slice()).unwrap();
        assert_eq!(back_meta, m);
        assert_eq!(back, series);
    }

    #[test]
    fn malformed_series_is_rejected() {
        let err = read_series("10 5 0 0.0 false\n1.0\nbogus\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}
