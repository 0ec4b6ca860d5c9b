"""Encoders and prediction heads."""

from .attention import AttentionConfig, AttentionEncoder, MultiHeadSelfAttention
from .heads import (
    ConversationHead,
    MtlLoss,
    MtlTargets,
    PairHead,
    UtteranceHead,
    UtteranceSpan,
    conversation_logits,
    mtl_loss,
    utterance_logits,
)
from .presets import TOWER_PRESETS, RETRIEVAL_PRESETS, preset_config, retrieval_config
from .tcn import (
    DualTowerConfig,
    DualTowerEncoder,
    TemporalBlock,
    TemporalBlockConfig,
    TowerConfig,
    build_dual_tower_config,
    count_parameters,
    pad_amounts,
    receptive_field,
    receptive_reach,
    tower_receptive_field,
)
