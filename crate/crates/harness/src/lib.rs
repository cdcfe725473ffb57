//! Experiment harness: synthetic data, file formats, and sweeps.
