"""Full-batch training with recorded parameter trajectories."""
