//! Pitch marking and pitch-synchronous overlap-add.
//!
//! Marking runs a normalized autocorrelation pitch tracker over 40 ms windows
//! (10 ms hop, F0 search 60 to 400 Hz) and then walks the clip placing one mark
//! per glottal period at the local waveform maximum nearest the predicted
//! period grid. Unvoiced stretches get a mark every 10 ms.
//!
//! Frames are two local periods long (20 ms when unvoiced), Hann weighted and
//! centred on their mark. Resynthesis overlap-adds them at the same marks with
//! a second Hann weighting and divides by the accumulated squared-window
//! envelope, so an unmodified frame set reconstructs the input.

mod marking;
mod psola;

pub use marking::{mark_pitch, PitchMark, PitchMarks, F0_MAX_HZ, F0_MIN_HZ};
pub use psola::{psola_resynthesize, segment_frames, AnalysisFrame, ENVELOPE_FLOOR};
