"""Classical baselines: two-layer ReLU networks against random-feature kernel machines."""
