"""
Rate-variable entropy model, frequency tables, range coder and model files.
"""
from .fitting import EntropyFitState, fit_entropy_model, load_fit_state, save_fit_state, select_q_for_lambda
from .model import ChannelEntropyModel, entropy_model_sample, rate_bits, rd_loss, symbol_prob
from .range_coder import Bitstream, range_decode, range_encode, tile_tables
from .storage import load_entropy_model, save_entropy_model
from .tables import FrequencyTable

__all__ = [
    "ChannelEntropyModel",
    "FrequencyTable",
    "Bitstream",
    "symbol_prob",
    "rate_bits",
    "rd_loss",
    "fit_entropy_model",
    "EntropyFitState",
    "save_fit_state",
    "load_fit_state",
    "select_q_for_lambda",
    "range_encode",
    "range_decode",
    "tile_tables",
    "entropy_model_sample",
    "save_entropy_model",
    "load_entropy_model",
]
