"""Distribution-aware evaluation of missing-data imputation."""

__version__ = "0.1.0"

from .datamodel import (Dataset, Feature, FeatureSchema, Normalizer, SchemaError,  # noqa: E402
                        apply_normalizer, fit_normalizer, invert_normalizer, load_dataset,
                        postprocess_imputed, save_dataset)
from .discrepancy import (feature_stats, kl_divergence, ks_statistic, sample_stats,  # noqa: E402
                          wasserstein2_1d)
from .sliced import (class_c_stats, outlier_proportions, sample_unit_directions,  # noqa: E402
                     sliced_distances)
