"""Synthetic task generators, batching and JSON-lines storage."""

from .batching import (
    BYTE_PAD,
    BYTE_VOCAB,
    PairBatch,
    SequenceBatch,
    SpecialTokens,
    TaskBatch,
    decode_batch,
    encode_batch,
    encode_pairs,
    encode_sequences,
)
from .conversations import Conversation, ConversationCorpus, GeneratorSpec, PlantedOracle, Utterance, gen_conversations
from .listops import ListOpsExample, eval_listops, gen_listops
from .text import RetrievalPair, TextExample, gen_retrieval, gen_text_bytes
