use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use sanitizer_core::audio::{read_wav, write_wav, AudioClip, FeatureMatrix};
use sanitizer_core::keyword::{
    dtw_distance, load_keyword_config, load_safeword_bank, spot_in_clip, substitute_keywords,
    write_substitution_log, Category, Detection, KeywordTemplate, SafewordBank, SpotterConfig,
    SubstitutionRecord, TemplateStore,
};
use sanitizer_core::warp::{
    convert_voice, convert_voice_segmented, sample_warp_params, ConversionConfig,
    ConvertedSegment,
};
use sanitizer_core::{Error, Result};

use crate::bench::{bench_clip, BenchReport};
use crate::error::{AtStage, Stage, StageError};

/// Enrolled templates and the category of each keyword.
#[derive(Debug, Clone)]
pub struct KeywordSetup {
    pub store: TemplateStore,
    pub categories: HashMap<String, Category>,
}

impl KeywordSetup {
    /// Enroll every keyword listed in a keyword configuration file. When a
    /// template store file exists it supplies the templates instead, so hits
    /// folded in by earlier runs are kept.
    pub fn load(config: &Path, store_path: Option<&Path>) -> Result<Self> {
        let entries = load_keyword_config(config)?;
        let stored: Option<TemplateStore> = match store_path {
            Some(p) if p.exists() => Some(serde_json::from_str(&std::fs::read_to_string(p)?)?),
            _ => None,
        };
        let mut store = stored.unwrap_or_default();
        let mut categories = HashMap::new();
        for e in &entries {
            if store.get(&e.label).is_none() {
                store.enroll(&e.label, &read_wav(&e.enrollment_clip)?)?;
            }
            categories.insert(e.label.clone(), e.category);
        }
        Ok(Self { store, categories })
    }

    /// Templates of the configured keywords only; a stored template whose
    /// label was dropped from the configuration is ignored.
    pub fn templates(&self) -> Vec<KeywordTemplate> {
        self.store
            .templates()
            .filter(|t| self.categories.contains_key(&t.label))
            .cloned()
            .collect()
    }
}

/// Everything `sanitize` needs; paths must be distinct.
#[derive(Debug, Clone)]
pub struct SanitizeManifest {
    pub input: PathBuf,
    pub output: PathBuf,
    pub conversion: ConversionConfig,
    pub spotter: SpotterConfig,
    pub keywords: PathBuf,
    pub safewords: PathBuf,
    pub log: PathBuf,
    /// Persisted template store; required for `confirm_hits`.
    pub templates: Option<PathBuf>,
    /// Fold every detection into its template as a confirmed hit.
    pub confirm_hits: bool,
    pub bench: bool,
}

impl SanitizeManifest {
    pub fn validate(&self) -> Result<()> {
        let mut paths = vec![&self.input, &self.output, &self.keywords, &self.safewords, &self.log];
        paths.extend(&self.templates);
        for (i, a) in paths.iter().enumerate() {
            if paths[i + 1..].contains(a) {
                return Err(Error::Configuration(format!(
                    "path {} is used for more than one role",
                    a.display()
                )));
            }
        }
        if self.confirm_hits && self.templates.is_none() {
            return Err(Error::Configuration(
                "confirming hits needs a template store path".into(),
            ));
        }
        self.conversion.validate()?;
        self.spotter.validate()
    }
}

/// How the voice was converted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionSummary {
    pub segments: Vec<ConvertedSegment>,
}

#[derive(Debug, Clone)]
pub struct SanitizedClip {
    pub clip: AudioClip,
    pub features: FeatureMatrix,
    pub detections: Vec<Detection>,
    pub records: Vec<SubstitutionRecord>,
    pub conversion: ConversionSummary,
}

/// Spot, substitute, then convert one clip.
///
/// The conversion seed drives both the safeword choice and the warp draw,
/// so a fixed seed gives identical output.
pub fn sanitize_clip(
    clip: &AudioClip,
    setup: &KeywordSetup,
    bank: &SafewordBank,
    conversion: &ConversionConfig,
    spotter: &SpotterConfig,
    utterance_id: &str,
) -> std::result::Result<SanitizedClip, StageError> {
    conversion.validate().at(Stage::Conversion)?;
    let (features, detections) = spot_in_clip(clip, &setup.templates(), spotter).at(Stage::Spotting)?;
    let mut rng = conversion.rng();
    let (substituted, records) = substitute_keywords(
        clip,
        &detections,
        &setup.categories,
        bank,
        utterance_id,
        &mut rng,
    )
    .at(Stage::Substitution)?;
    let (converted, segments) =
        convert_clip(&substituted, conversion, &mut rng).at(Stage::Conversion)?;
    Ok(SanitizedClip {
        clip: converted,
        features,
        detections,
        records,
        conversion: ConversionSummary { segments },
    })
}

/// Convert with one sampled warp, or per segment when segment
/// randomization is on.
pub fn convert_clip<R: Rng + ?Sized>(
    clip: &AudioClip,
    config: &ConversionConfig,
    rng: &mut R,
) -> Result<(AudioClip, Vec<ConvertedSegment>)> {
    if config.segment_randomization {
        let seg = convert_voice_segmented(clip, config)?;
        return Ok((seg.clip, seg.segments));
    }
    let kind = sample_warp_params(&config.band(), config.policy, rng)?;
    let out = convert_voice(clip, &kind, config.fft_size)?;
    let segment = ConvertedSegment {
        start_sample: 0,
        end_sample: clip.len(),
        kind,
    };
    Ok((out, vec![segment]))
}

/// Apply every detection of a sanitized clip to the template store.
pub fn confirm_hits(
    setup: &mut KeywordSetup,
    sanitized: &SanitizedClip,
) -> std::result::Result<usize, StageError> {
    for d in &sanitized.detections {
        let span = sanitized
            .features
            .slice_rows(d.start_row, d.end_row + 1)
            .at(Stage::TemplateUpdate)?;
        let template = setup.store.get(&d.label).ok_or_else(|| StageError {
            stage: Stage::TemplateUpdate,
            source: Error::Argument(format!("no template for '{}'", d.label)),
        })?;
        let path = dtw_distance(&template.x, &span).at(Stage::TemplateUpdate)?.path;
        setup
            .store
            .confirm_hit(&d.label, &span, &path)
            .at(Stage::TemplateUpdate)?;
    }
    Ok(sanitized.detections.len())
}

#[derive(Debug, Clone, Serialize)]
pub struct SanitizeOutcome {
    pub detections: Vec<Detection>,
    pub records: Vec<SubstitutionRecord>,
    pub conversion: ConversionSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchReport>,
}

/// File-to-file sanitization: read, spot, substitute, convert, write the
/// WAV and the substitution log.
pub fn sanitize(manifest: &SanitizeManifest) -> std::result::Result<SanitizeOutcome, StageError> {
    manifest.validate().at(Stage::Input)?;
    let clip = read_wav(&manifest.input).at(Stage::Input)?;
    let mut setup =
        KeywordSetup::load(&manifest.keywords, manifest.templates.as_deref()).at(Stage::Keywords)?;
    let bank = load_safeword_bank(&manifest.safewords).at(Stage::Safewords)?;
    let utterance_id = manifest
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let out = sanitize_clip(
        &clip,
        &setup,
        &bank,
        &manifest.conversion,
        &manifest.spotter,
        &utterance_id,
    )?;
    write_wav(&out.clip, &manifest.output).at(Stage::Output)?;
    write_substitution_log(&manifest.log, &out.records).at(Stage::Log)?;
    if manifest.confirm_hits {
        confirm_hits(&mut setup, &out)?;
        let path = manifest.templates.as_ref().expect("validated");
        let json = serde_json::to_string(&setup.store).at(Stage::TemplateUpdate)?;
        std::fs::write(path, json).at(Stage::TemplateUpdate)?;
    }
    let bench = if manifest.bench {
        Some(
            bench_clip(&clip, &setup, &bank, &manifest.conversion, &manifest.spotter)
                .at(Stage::Bench)?,
        )
    } else {
        None
    };
    Ok(SanitizeOutcome {
        detections: out.detections,
        records: out.records,
        conversion: out.conversion,
        bench,
    })
}
