"""The circular 2-D Gaussian benchmark data, full and gapped.

Labels are angles; each label's samples come from a Gaussian centered on the
unit circle.  The gapped variant removes three arcs from the label range and
keeps their midpoints as held-out test labels.
"""

import numpy as np

from grcgan.datasets import CircularSpec, circular_labels, default_gaps, sample_circular

rng = np.random.default_rng(0)

full = CircularSpec()
train_labels, test_labels = circular_labels(full)
ds = sample_circular(full, train_labels, rng)
print(f"full dataset: {len(train_labels)} labels x {full.samples_per_label} samples "
      f"= {len(ds)} rows, {len(test_labels)} test labels")
print(f"label spacing: {np.diff(np.sort(train_labels))[0]:.6f} rad everywhere")

radii = np.linalg.norm(ds.outputs, axis=1)
print(f"sample radius: mean={radii.mean():.3f} (circle radius {full.radius}), "
      f"spread={radii.std():.3f} (sigma_tilde {full.sigma_tilde})")

partial = CircularSpec(gaps=default_gaps())
train_p, test_p = circular_labels(partial)
print(f"\npartial dataset: {len(train_p)} train labels avoiding 3 gaps of width pi/12")
print(f"test labels (gap midpoints): {np.round(test_p, 4)}")
for lo, hi in partial.gaps:
    inside = ((train_p > lo) & (train_p < hi)).sum()
    print(f"  gap [{lo:.3f}, {hi:.3f}]: {inside} train labels inside")

ds_p = sample_circular(partial, train_p, rng)
print(f"partial rows: {len(ds_p)}")

# The quality threshold used throughout the evaluation: the circle around
# each center holding about 90% of that Gaussian's mass.
print(f"\nhigh-quality threshold: 2.15 * sigma_tilde = {full.hq_threshold}")
