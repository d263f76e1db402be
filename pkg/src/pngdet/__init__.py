"""Discrete polynuclear growth, determinantal point processes and the Airy process."""
from .lattice import (GeomParams, WeightField, HeightEvolution, MultiLayerConfig, Partition, RescaledPath,
                      sample_weight_field, evolve_png, lpp_table, point_to_line, jumps, t_operator,
                      multilayer, reconstruct_weights, rsk_shape, rescale_height, transversal_argmax,
                      png_constants)
from .determinantal import (GridMeasure, TransitionSystem, BlockKernel, convolve, gram_matrix,
                            partition_function, correlation_kernel, brute_force_correlation,
                            fredholm_det_expansion, gap_probability, product_rule_check)
from .toeplitz import (ScalarSymbol, SymbolSystem, PNGKernelParams, ContourSpec, toeplitz_matrix,
                       finite_n_generating, limit_kernel_G, png_kernel, phi_uv, scaled_kernel_limit,
                       png_height_cdf, png_joint_cdf)
from .airy import (ExtendedAiryKernelSpec, airy_fn, extended_airy_kernel, extended_airy_double_integral,
                   phi_gaussian, airy_fdd, tw1, tw2, painleve_hastings_mcleod)
from .circle import CircleWalkParams, cylinder_kernel, limit_kernel, top_label_selection_check
from .montecarlo import (ExperimentConfig, EmpiricalStats, run_ensemble, g_point_vs_tw2, gpl_vs_tw1,
                         two_time_vs_airy, transversal_histogram)
from ._kernels import backend

__version__ = "0.1.0"
