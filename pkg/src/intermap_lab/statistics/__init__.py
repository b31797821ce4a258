from .correlation import CorrelationEstimate, estimate_correlation, renewal_leading_term, renewal_prediction
from .limit_laws import (LargeDeviationCurve, Normalization, NPow, SqrtN, SqrtNLogN, StableConstants,
                         birkhoff_normalized_sums, birkhoff_sums, fit_centered_gaussian,
                         large_deviation_curve, ld_exponent, stable_limit)
from .recurrence import (RecurrenceSample, VisitCounts, ball_measure, check_ball, duality_distance,
                         hitting_from_returns, hitting_time_distribution, recurrence_sample,
                         return_time_distribution, visit_count_distribution)
from .extremes import (EVLClass, G1, G2, G3, extreme_maxima_distribution, min_distances,
                       normalizing_constants)
