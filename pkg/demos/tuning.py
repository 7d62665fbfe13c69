"""Choosing lambda1 and lambda2 on a validation set and by cross-validation."""

import numpy as np

from matlda import SimulationSpec, TuningGrid, generate_replicate, grid_search, kfold_cv

rep = generate_replicate(SimulationSpec(model=2, r=8, c=8, seed=8))
grid = TuningGrid([2.0 ** x for x in (-6, -4, -2, 0)], [2.0 ** x for x in (-6, -4, -2, 0)])

report = grid_search(rep.train, rep.validate, grid)
print("validation error by (lambda1 rows, lambda2 columns):")
table = np.array([[report.errors[(a, b)] for b in grid.lambda2_values]
                  for a in grid.lambda1_values])
print(np.round(table, 3))
print("chosen:", report.chosen, " tied cells:", report.ties,
      " (ties go to the larger lambda1, then the larger lambda2)")

report = kfold_cv(rep.train, 5, grid, seed=0)
print("\n5-fold cross-validation picks", report.chosen,
      f"with mean error {report.min_error:.3f}")
