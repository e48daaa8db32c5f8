"""Received SNR and near-field boundaries for extremely large planar arrays."""

from .channel import (ArrayResponse, ChannelModel, ConvergenceWarning, LinkBudget,
                      array_response, element_gain, element_gain_exact, model_gains,
                      response_power, total_gain)
from .fieldregions import (BracketError, Criterion, FieldDistanceResult, classical_rayleigh,
                           dd_rayleigh, max_phase_error, power_ratio, power_ratio_scan, upd)
from .geometry import ArrayGeometry, ElementIndex, UserPose, element_distance, element_position
from .snr import (AngularSpans, SnrMethod, SnrResult, snr_angular_phi0, snr_angular_theta_pi2,
                  snr_asymptotic_limit, snr_boresight, snr_bruteforce, snr_closed_form,
                  snr_far_field, snr_nusw_reference, snr_upw_reference, to_db)
from .ula import (CriticalPoint, RhoFactors, UlaAngles, constant_span_pose, ula_angles,
                  ula_constant_span_circle, ula_critical_point, ula_nusw_snr, ula_rho_factors,
                  ula_snr, ula_snr_limit)

__version__ = "0.1.0"
