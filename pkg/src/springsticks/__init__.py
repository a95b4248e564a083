"""Springs-and-sticks lattice regression with Langevin dynamics and
stochastic-thermodynamics instrumentation."""

from .errors import (
    ConfigError,
    DomainError,
    EstimatorUndefinedError,
    IntegrationBlowupError,
    SingularDiffusionError,
    SpringSticksError,
)
from .lattice import (
    CellCoords,
    GridState,
    LatticeSpec,
    interpolate,
    interpolate_many,
    interpolation_weights,
    load_grid_state,
    locate,
    save_grid_state,
    weight_matrix,
)
from .mechanics import (
    MassMatrix,
    PhysicsParams,
    SpringBatch,
    assemble_mass,
    batch_operator,
    kinetic_energy,
    potential_energy,
    spring_force,
)
from .langevin import (
    LinearSDE,
    SdeRun,
    TrajectoryLog,
    assemble_sde,
    em_step,
    integrate,
    integrate_ensemble,
    single_dof_sde,
    stable_dt,
    suggested_dt,
    state_to_vec,
    trajectory_rng,
    vec_to_state,
)
from .thermo import (
    MomentState,
    WorkLedger,
    entropy_rates,
    gaussian_entropy,
    jarzynski_bootstrap,
    jarzynski_free_energy,
    propagate_moments,
    record_switch_work,
)
from .training import (
    Dataset,
    EnsembleTrainReport,
    FUNCTIONS,
    SyntheticSpec,
    TrainReport,
    TrainSchedule,
    approximation_error,
    batch_schedule,
    detect_steady_state,
    least_squares_fit,
    load_dataset,
    mse_loss,
    oracle_fit,
    save_dataset,
    synthesize,
    train,
    train_ensemble,
)
from .mlp import MlpParams, init_mlp, mlp_forward, mlp_grad, mlp_train
from .estimators import MlpRegressor, SpringSticksRegressor

__version__ = "0.1.0"
