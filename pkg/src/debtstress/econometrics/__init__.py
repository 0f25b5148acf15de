"""Local-projection and quantile-regression models of disaster impacts."""
from .coefficients import (CHANNEL_OF_OUTCOME, DISASTER_TERMS, OUTCOME_OF_CHANNEL, OUTCOMES,
                           TERMS, CoefficientSet, select)
from .lp import (InsufficientDataError, RankDeficientError, design, lp_estimate, qr_estimate,
                 residual_orthogonality)
from .predict import (Z95, CounterfactualResult, PredictedShockPath, SupportWarning, counterfactual,
                      covariates, marginal_effect,
                      predict_path)
from .synthetic import DEFAULT_TRUTH, synthetic_panel
from .qr import (DegenerateDesignError, QRConvergenceError, QRFit, exhaustive_qr,
                 iid_standard_errors, pinball_loss, quantreg)
