# # Comparing activations and exporting the error field
#
# Train one network per activation with its tuned learning rate, then write
# the x, y, psi_ap, psi_th, abs_err table for the best one. Any plotting tool
# can turn field.csv into heat maps of the solution and its error.

import sys
from pathlib import Path

from pinnlab import LayerSpec, TrainConfig, train
from pinnlab.problem import field_csv

epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 3000
rates = {"tanh": 3.2040e-4, "sigmoid": 1.3673e-5, "gelu": 1.1891e-4,
         "elu": 9.5295e-4, "relu": 4.1886e-2}

reports = {}
for kind, lr in rates.items():
    cfg = TrainConfig(spec=LayerSpec.uniform([2, 30, 1], kind, linear_output=True),
                      learning_rate=lr, epochs_max=epochs, mae_checkpoints=(epochs,))
    reports[kind] = train(cfg)
    print(f"{kind:8s} lr={lr:.4e}  MAE={reports[kind].final_mae:.3e}")

# Sigmoid needs far more epochs at its small rate; ReLU has zero second
# derivative almost everywhere, so the network cannot bend psi_xx or psi_yy.

best = min(reports, key=lambda k: reports[k].final_mae)
out = Path("field.csv")
r = reports[best]
out.write_text(field_csv(r.config.spec, r.final_params, 100))
print(f"wrote {out} for {best}")
