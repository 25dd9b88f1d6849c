"""Runtime safety assurance for geofenced flight missions.

A simulated multirotor flies a waypoint mission inside a box geofence under
stochastic wind. A meta-controller watches the state and decides, every step,
whether to let the nominal path follower continue or to deploy a terminal
parachute recovery. The switch is either a hand-set distance threshold or a
learned linear value function, and the two are compared on matched-seed
episode batches via system-operating-characteristic sweeps.
"""

from .geometry import Envelope, Mission, build_path
from .policy import Action, RewardConfig
from .scenario import Scenario, default_scenario, load_scenario
from .sim import SimConfig, VehicleState

__version__ = "0.1.0"

__all__ = [
    "Envelope",
    "Mission",
    "build_path",
    "Action",
    "RewardConfig",
    "Scenario",
    "default_scenario",
    "load_scenario",
    "SimConfig",
    "VehicleState",
    "__version__",
]
