"""Encoder / LSTM / spiking hybrid network with manual backpropagation."""
from .gradcheck import GradCheckReport, grad_check, relative_error
from .layers import (attention, ffn, layer_norm, mha_forward, softmax_rows)
from .lstm import LstmParams, LstmState, lstm_step
from .network import (ForwardTrace, HybridConfig, HybridNetParams, apply_stdp,
                      backward, embed, encoder_forward, forward, init_network,
                      load_checkpoint, q_values, save_checkpoint)
from .spiking import (LifParams, LifState, StdpParams, lif_step, stdp_delta,
                      stdp_from_rasters, stdp_update)
