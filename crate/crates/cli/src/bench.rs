use serde::{Deserialize, Serialize};

use sanitizer_core::audio::AudioClip;
use sanitizer_core::keyword::{spot_in_clip, substitute_keywords, SafewordBank, SpotterConfig};
use sanitizer_core::pitch::mark_pitch;
use sanitizer_core::warp::{convert_with_marks, sample_warp_params, ConversionConfig};
use sanitizer_core::{Error, Result};

use crate::pipeline::KeywordSetup;

pub const BENCH_REPEATS: usize = 5;
pub const MIN_BENCH_S: f64 = 1.0;

/// Process CPU time in seconds.
pub fn cpu_time_s() -> f64 {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: ts is a valid, writable timespec.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    assert_eq!(rc, 0, "process CPU clock unavailable");
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

/// Pin glibc's heap thresholds so buffers of every size are served from
/// the heap. Left dynamic, the allocator mmaps large buffers afresh on
/// each call once an earlier stage has freed a big block, and the page
/// faults that follow are charged to whichever stage allocates next.
pub fn pin_allocator() {
    #[cfg(all(target_os = "linux", target_env = "gnu"))]
    // SAFETY: mallopt only adjusts allocator tuning parameters.
    unsafe {
        libc::mallopt(libc::M_MMAP_THRESHOLD, 64 << 20);
        libc::mallopt(libc::M_TRIM_THRESHOLD, 256 << 20);
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t0 = cpu_time_s();
    let out = f();
    (out, (cpu_time_s() - t0).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimes {
    pub pitch_marking: f64,
    pub other_vc: f64,
    pub keyword_spotting: f64,
    pub substitution: f64,
    pub total: f64,
}

impl StageTimes {
    fn scaled(&self, k: f64) -> Self {
        Self {
            pitch_marking: self.pitch_marking * k,
            other_vc: self.other_vc * k,
            keyword_spotting: self.keyword_spotting * k,
            substitution: self.substitution * k,
            total: self.total * k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub audio_duration_s: f64,
    pub cpu_time_s: StageTimes,
    pub realtime_coefficient: StageTimes,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// CPU time of each sanitizer stage for one pass over `clip`.
pub fn bench_once(
    clip: &AudioClip,
    setup: &KeywordSetup,
    bank: &SafewordBank,
    conversion: &ConversionConfig,
    spotter: &SpotterConfig,
) -> Result<StageTimes> {
    let templates = setup.templates();
    let mut rng = conversion.rng();
    let (spotted, t_ks) = timed(|| spot_in_clip(clip, &templates, spotter));
    let (_, detections) = spotted?;
    let (substituted, t_sub) = timed(|| {
        substitute_keywords(clip, &detections, &setup.categories, bank, "bench", &mut rng)
    });
    let (substituted, _) = substituted?;
    let (marks, t_pm) = timed(|| mark_pitch(&substituted));
    let marks = marks?;
    let kind = sample_warp_params(&conversion.band(), conversion.policy, &mut rng)?;
    let (converted, t_vc) =
        timed(|| convert_with_marks(&substituted, &marks, &kind, conversion.fft_size));
    converted?;
    Ok(StageTimes {
        pitch_marking: t_pm,
        other_vc: t_vc,
        keyword_spotting: t_ks,
        substitution: t_sub,
        total: t_pm + t_vc + t_ks + t_sub,
    })
}

/// Reduce each stage's run times with `pick`; the total is the sum of the
/// reduced stages.
fn reduce_times(runs: &[StageTimes], pick: fn(Vec<f64>) -> f64) -> StageTimes {
    let m = |f: fn(&StageTimes) -> f64| pick(runs.iter().map(f).collect());
    let (pm, vc, ks, sub) = (
        m(|t| t.pitch_marking),
        m(|t| t.other_vc),
        m(|t| t.keyword_spotting),
        m(|t| t.substitution),
    );
    StageTimes {
        pitch_marking: pm,
        other_vc: vc,
        keyword_spotting: ks,
        substitution: sub,
        total: pm + vc + ks + sub,
    }
}

pub fn median_times(runs: &[StageTimes]) -> StageTimes {
    reduce_times(runs, median)
}

/// Per-stage minimum. Interference only ever adds CPU time, so this is the
/// least noisy estimate of a stage's own cost.
pub fn min_times(runs: &[StageTimes]) -> StageTimes {
    reduce_times(runs, |v| v.into_iter().fold(f64::INFINITY, f64::min))
}

/// Report for a clip from per-stage CPU times.
pub fn report(duration_s: f64, cpu: StageTimes) -> BenchReport {
    BenchReport {
        audio_duration_s: duration_s,
        cpu_time_s: cpu,
        realtime_coefficient: cpu.scaled(1.0 / duration_s),
    }
}

/// CPU time of each sanitizer stage on `clip`, median of
/// [`BENCH_REPEATS`] runs.
pub fn bench_clip(
    clip: &AudioClip,
    setup: &KeywordSetup,
    bank: &SafewordBank,
    conversion: &ConversionConfig,
    spotter: &SpotterConfig,
) -> Result<BenchReport> {
    let duration = clip.duration_s();
    if duration < MIN_BENCH_S {
        return Err(Error::Argument(format!(
            "benchmark clip is {duration:.3} s, need at least {MIN_BENCH_S} s"
        )));
    }
    conversion.validate()?;
    pin_allocator();
    let runs = (0..BENCH_REPEATS)
        .map(|_| bench_once(clip, setup, bank, conversion, spotter))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(duration, median_times(&runs)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(x: f64) -> StageTimes {
        StageTimes {
            pitch_marking: x,
            other_vc: 2.0 * x,
            keyword_spotting: 3.0 * x,
            substitution: 4.0 * x,
            total: 10.0 * x,
        }
    }

    #[test]
    fn report_uses_stage_medians() {
        let runs = [times(1.0), times(9.0), times(2.0), times(3.0), times(0.5)];
        let r = report(4.0, median_times(&runs));
        assert_eq!(r.cpu_time_s, times(2.0));
        assert_eq!(r.realtime_coefficient.total, 20.0 / 4.0);
        assert_eq!(min_times(&runs), times(0.5));
    }

    #[test]
    fn cpu_clock_advances() {
        let t0 = cpu_time_s();
        let mut x = 0u64;
        for i in 0..5_000_000u64 {
            x = x.wrapping_mul(31).wrapping_add(i);
        }
        std::hint::black_box(x);
        assert!(cpu_time_s() > t0);
    }
}
