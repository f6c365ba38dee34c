"""Spatio-temporal receptive-field smoothing with geometric-covariance
verification on discrete video volumes."""

__version__ = "0.1.0"

from .geom import (GeoTransform, HomogeneousTransform, RFParams, apply_point,
                   compose, gradient_transform_matrices, inverse, rotation,
                   to_homogeneous, transform_direction_rotation, transform_params)
from .kernels import (SampledKernel1D, SampledKernel2D, SampledKernel3D,
                      TemporalKernelSpec, affine_gaussian_2d,
                      limit_kernel_time_constants, spatiotemporal_kernel,
                      temporal_gaussian, time_causal_limit_kernel)
from .scspace import (DerivativeSpec, derivative, lgn_response,
                      simple_cell_response, smooth)
from .verify import (CovarianceReport, VerifyConfig, sweep,
                     verify_derivative_covariance, verify_kernel_transform_identity,
                     verify_smoothing_covariance)
from .volume import VideoVolume, read_volume, write_volume
from .warp import WarpConfig, synthesize_test_pattern, warp_video

__all__ = [name for name in dir() if not name.startswith("_")]
