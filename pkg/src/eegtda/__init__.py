"""EEG persistent-homology features and stress classification pipeline."""

__version__ = "0.1.0"

from .homology import (PersistenceDiagram, betti_curve, bottleneck_distance,
                       compute_persistence, h0_via_mst, persistent_entropy,
                       rips_filtration)
from .pointcloud import distance_matrix, pca_embed
from .preprocessing import FilterSpec, bandpass, notch, preprocess, segment_trials
from .signal_io import (CohortSpec, Label, Recording, Segment, load_recording,
                        synth_cohort, synth_forms, write_recording)

__all__ = [
    "__version__",
    "CohortSpec", "FilterSpec", "Label", "PersistenceDiagram", "Recording",
    "Segment",
    "bandpass", "betti_curve", "bottleneck_distance", "compute_persistence",
    "distance_matrix", "h0_via_mst", "load_recording", "notch", "pca_embed",
    "persistent_entropy", "preprocess", "rips_filtration", "segment_trials",
    "synth_cohort", "synth_forms", "write_recording",
]
