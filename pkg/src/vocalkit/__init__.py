"""vocalkit: compare animal vocalizations across host-language environments.

Submodules:
    audio        -- ingestion, resampling, spectrogram, envelope
    segmentation -- sentence/word extraction with noise filtering
    features     -- filterbank / MFCC / PLP / handcrafted descriptors
    pairing      -- context-matched 4-class pair construction
    classify     -- four classifier families + cross-validation harness
    explain      -- Shapley attribution and Pearson correlation
    syllables    -- oscillator-based syllable-like-unit detection
    synth        -- planted-ground-truth synthetic corpus generator
    manifest     -- corpus manifest loading, validation, statistics
    pipeline     -- batch stage orchestration with run ledger
    cli          -- command-line entry point
"""

__version__ = "0.1.0"
