"""Morph detection from ULBP landmark persistence and block-quality histograms."""

from .classify import SvmModel, TrainConfig, kernel, predict, train_svm
from .evaluate import EvalReport, LabeledDataset, cross_db, five_fold_cv, frr_far
from .featurize import FeatureVector, barcode_stats, betti_binning
from .image_io import GrayImage, load_grayscale, partition_blocks, resize_bilinear
from .mciq import mciq_vector, pair_indices
from .persistence import FiltrationParams, PersistenceBarcode, brute_force_barcode, vr_barcode
from .pipeline import PipelineConfig, image_features
from .ulbp import LbpConfig, PointCloud, extract_landmarks, lbp_code

__version__ = "0.1.0"
