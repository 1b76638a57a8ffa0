"""Physics-based refinement of hand-object poses."""

from ._core import (
    ContactParams,
    EnergyWeights,
    NoCertificateError,
    RefineConfig,
    Scene,
    annealed_z,
    builtin_object,
    contact_probability,
    count_penetrating,
    evaluate_scene,
    generate_static_grasp,
    inject_finger_noise,
    mpjpe,
    pr_auc,
    read_scene,
    refine,
    roc_auc,
    signed_distance,
    solve_equilibrium,
    write_scene,
)

__all__ = [
    "ContactParams",
    "EnergyWeights",
    "NoCertificateError",
    "RefineConfig",
    "Scene",
    "annealed_z",
    "builtin_object",
    "contact_probability",
    "count_penetrating",
    "evaluate_scene",
    "generate_static_grasp",
    "inject_finger_noise",
    "mpjpe",
    "pr_auc",
    "read_scene",
    "refine",
    "roc_auc",
    "signed_distance",
    "solve_equilibrium",
    "write_scene",
]
