"""Scikit-learn style front end for the two-sample tests."""
from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .data import check_pair
from .exceptions import ParameterError
from .imputation import ImputerKind
from .resampling import Procedure, bootstrap_test

_STATISTICS = {"cc": "complete_case", "complete_case": "complete_case",
               "weighted": "weighted", "impute": "imputed", "imputed": "imputed"}
_BOOTSTRAPS = {"split": "split_preserving", "split_preserving": "split_preserving",
               "pooled": "pooled"}


class EnergyTwoSampleTest(BaseEstimator):
    """Bootstrap energy test of equal distributions for incomplete samples.

    Parameters
    ----------
    statistic : {"weighted", "cc", "impute"}
        Weighted-distance statistic, complete-case statistic, or classic
        statistic after imputation.
    bootstrap : {"split", "pooled"}
        Resampling scheme for the "weighted" and "cc" statistics. Ignored
        for "impute", which always splits the pooled incomplete data and
        imputes each half.
    imputer : {"mean", "median", "knn"}
    n_neighbors : int
        Donor count of the "knn" imputer.
    n_bootstrap : int
    alpha : float
    random_state : int, Generator or None

    Attributes
    ----------
    statistic_ : StatisticValue
    replicates_ : ndarray of shape (n_bootstrap,)
    pvalue_ : float
    reject_ : bool
    critical_value_ : float
    """

    def __init__(self, statistic="weighted", bootstrap="split", imputer="mean",
                 n_neighbors=6, n_bootstrap=1000, alpha=0.05, random_state=None):
        self.statistic = statistic
        self.bootstrap = bootstrap
        self.imputer = imputer
        self.n_neighbors = n_neighbors
        self.n_bootstrap = n_bootstrap
        self.alpha = alpha
        self.random_state = random_state

    def _procedure(self):
        if self.statistic not in _STATISTICS:
            raise ParameterError(f"unknown statistic {self.statistic!r}")
        stat = _STATISTICS[self.statistic]
        if stat == "imputed":
            return Procedure(stat, "impute_bootstrap",
                             ImputerKind(self.imputer, self.n_neighbors),
                             B=self.n_bootstrap, alpha=self.alpha)
        if self.bootstrap not in _BOOTSTRAPS:
            raise ParameterError(f"unknown bootstrap {self.bootstrap!r}")
        return Procedure(stat, _BOOTSTRAPS[self.bootstrap], B=self.n_bootstrap, alpha=self.alpha)

    def fit(self, X, Y):
        """Run the test of X against Y (arrays with NaN at missing cells)."""
        proc = self._procedure()
        x, y = check_pair(X, Y)
        self.procedure_ = proc
        self.outcome_ = bootstrap_test(x, y, proc, self.random_state)
        self.statistic_ = self.outcome_.observed
        self.replicates_ = self.outcome_.replicates
        self.pvalue_ = self.outcome_.p_value
        self.reject_ = self.outcome_.reject
        self.critical_value_ = self.outcome_.critical_value
        return self

    def report(self):
        check_is_fitted(self, "outcome_")
        out = self.outcome_.to_dict()
        out["procedure"] = self.procedure_.label
        return out
