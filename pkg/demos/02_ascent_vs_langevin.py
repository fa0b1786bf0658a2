"""Mode seeking vs sampling with the same conservative model.

A COM is trained with alpha = 50: regression plus a contrastive term that
pushes f up on data and down on negatives made by a short Langevin chain.
Read as an energy model, exp(f) is an unnormalised density over x.

The original recipe follows grad f with plain gradient ascent. Every chain
climbs to the nearest maximum of f, so the samples pile up on a handful of
points (usually one). Swapping in Langevin dynamics turns the same f into a
sampler for exp(f), and diversity comes back.

    python demos/02_ascent_vs_langevin.py [--out demos/out] [--steps 50000]
"""

import argparse
from pathlib import Path

from comsebm import (SamplerSpec, SpiralSpec, TrainConfig, evaluate, ground_truth_reward,
                     sample_batch, spiral_generate, train_com)
from comsebm.svg import scatter_svg

ap = argparse.ArgumentParser()
ap.add_argument("--out", default="demos/out")
ap.add_argument("--steps", type=int, default=50_000)
ap.add_argument("--epochs", type=int, default=500)
args = ap.parse_args()
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

data = spiral_generate(SpiralSpec(n=1000, seed=0))
com = train_com(TrainConfig(variant="stochastic", alpha=50.0, epochs=args.epochs, seed=0), data)
last = com.history[-1]
print(f"alpha=50: final mse {last.mse_term:.4f}, reg {last.reg_term:+.4f}")

for kind in ("gradient_ascent", "langevin"):
    spec = SamplerSpec(kind=kind, steps=args.steps, seed=0)
    samples = sample_batch(spec, com.field, 256)
    r = evaluate(samples)
    print(f"{kind:16s} diversity {r.diversity:.3f}  validity {r.validity_rate:.3f}  "
          f"mean reward {r.mean_reward:.3f}")
    (out / f"samples_{kind}_alpha50.svg").write_text(
        scatter_svg(ground_truth_reward, data=data.x, samples=samples))

# Gradient ascent gives (near) zero diversity. Langevin spreads the samples
# out, but with one network modelling both reward and density, few of them
# land on the spiral near its centre.
print(f"figures written to {out}/")
