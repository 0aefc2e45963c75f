"""Shrinking-target hitting sequences and random ergodic averages."""

__version__ = "0.1.0"

from .digit_orbit import DigitStream, RationalInterval, shifted_point_in
from .errors import (CapExceeded, ConditionViolated, ConfigInvalid,
                     PrecisionAbort, ShrinkTargetError, SizeExceeded,
                     Undecidable)
from .targets import (DyadicTarget, HittingSequence, TargetFamily,
                      build_bernoulli_hitting,
                      build_dyadic, build_hitting, exact_joint_measure,
                      lambda_sets, partition_smr, residue_classes,
                      sigma_enclosure, symm_diff_count)
from .systems import MPSystem, Observable, e_k, make_system
from .averages import (AverageTrace, double_average, interaction_sum,
                       lacunary_grid, lln_check, semi_random_average,
                       single_average, two_power_average)
from .spectral import (ExpSumProfile, QuantileReport, concentration_trial,
                       exact_cov, mc_cov, sup_bracket, vdc_check)
