"""Sampling, spectral computation and statistical verification of limit
laws for non-Hermitian random matrices with i.i.d. entries."""

from .diagnostics import GofReport, ks_distance, wasserstein2_sorted
from .ensembles import EntryLaw, sample_ginibre, sample_iid_matrix
from .rng import Seed
from .spectral import eigenvalues, empirical_measures, singular_values
from .transforms import QPoint, QTransform, quaternionic_transform

__all__ = ["EntryLaw", "GofReport", "QPoint", "QTransform", "Seed", "eigenvalues", "empirical_measures",
           "ks_distance", "quaternionic_transform", "sample_ginibre", "sample_iid_matrix", "singular_values",
           "wasserstein2_sorted"]
