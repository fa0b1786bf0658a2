"""Conservative objective models as contrastive-divergence energy models,
with gradient-ascent, Langevin and reward-tilted Langevin samplers on a 2D
spiral benchmark."""

from .data import (Dataset, LabeledPoint, PriorSpec, SpiralSpec, ground_truth_reward,
                   prior_sample, read_dataset, spiral_generate, write_dataset)
from .errors import (ComsError, ConfigError, DatasetFormatError, InputError,
                     SamplerDiverged)
from .evaluation import EvalReport, distance_to_spiral, diversity, evaluate, gradient_alignment
from .nnet import (MlpField, OptimizerState, ParamGrad, energy, forward, grad_input,
                   grad_params, mlp_init, optimizer_step)
from .sampling import (GeometricSchedule, QuadraticField, SamplerSpec, geomspace,
                       gradient_ascent_chain, langevin_chain, sample_batch,
                       tilted_langevin_chain)
from .training import (Checkpoint, LossBreakdown, TrainConfig, com_loss_and_grad,
                       make_negatives, train_com, train_oracle)

__version__ = "0.1.0"
