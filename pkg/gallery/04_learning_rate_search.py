# # Learning-rate search
#
# Candidates are spread evenly (grid) or uniformly at random over a set of
# intervals. Every candidate is an independent training run; the winner per
# activation has the lowest MAE at the last checkpoint.
#
# The full setup (five decades x 50 rates x five activations, 10000 epochs
# each) is `pinnlab tune --config grid_search`. Here we shrink it.

from dataclasses import replace

from pinnlab import LayerSpec, SearchSpace, TrainConfig, run_search
from pinnlab.hypertune import grid_candidates, random_candidates

space = SearchSpace(intervals=((1e-4, 1e-3), (1e-3, 1e-2)), points_per_interval=3)
print("grid:  ", grid_candidates(space))
print("random:", [round(v, 6) for v in random_candidates(replace(space, mode="random", seed=7))])

base = TrainConfig(spec=LayerSpec.uniform([2, 30, 1], "tanh", linear_output=True),
                   epochs_max=1000, mae_checkpoints=(500, 1000))
report = run_search(space, base, ["tanh", "gelu"])

print(report.trials_csv())
print(report.summary_csv())
