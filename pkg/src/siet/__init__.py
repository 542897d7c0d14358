"""Capacity-energy functions for simultaneous information and energy transmission."""
from .channels import (
    Dmc,
    EnergyFunctional,
    InputDistribution,
    MulticastProblem,
    hamming_energy,
    make_bsc,
    make_z,
    mutual_information,
    output_distribution,
    received_energy,
)
from .multicast import (
    InfeasibleConstraintError,
    b_max_multicast,
    domain_feasible,
    multicast_capacity,
    multicast_capacity_common,
    per_channel_curves,
    upper_bound_min_individual,
)
from .pointtopoint import b_max_single, capacity_curve, capacity_energy

__version__ = "0.1.0"
from .gaussian import GaussianMulticast, gaussian_capacity_energy, kkt_verify, marginal_information_density
from .oracle import GridSpec, concavity_probe, domain_convexity_probe, grid_capacity_energy, product_capacity_n2
from .segmentation import Segmentation, enumerate_partitions, group_capacity, optimize_capacity, optimize_loss, segmentation_loss
from .specfile import emit_spec, load_spec, parse_spec
