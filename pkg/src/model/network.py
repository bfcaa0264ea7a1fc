from __future__ import annotations

import torch
from torch import nn

from ..errors import SequenceTooLongError
from .config import ModelConfig


class LanguageDecisionModel(nn.Module):
    """Encoder-decoder over word tokens: context in, [goal, action, next observation] out."""

    def __init__(self, config: ModelConfig) -> None:
        super().__init__()
        self.config = config
        width = config.model_width
        self.embed = nn.Embedding(config.vocab_size, width)
        self.encoder_positions = nn.Embedding(config.max_input_tokens, width)
        self.decoder_positions = nn.Embedding(config.max_output_tokens, width)

        encoder_layer = nn.TransformerEncoderLayer(
            width,
            config.attention_heads,
            config.feedforward_width,
            config.dropout,
            activation="gelu",
            batch_first=True,
            norm_first=True,
        )
        self.encoder = nn.TransformerEncoder(
            encoder_layer,
            config.encoder_layers,
            norm=nn.LayerNorm(width),
            enable_nested_tensor=False,
        )
        decoder_layer = nn.TransformerDecoderLayer(
            width,
            config.attention_heads,
            config.feedforward_width,
            config.dropout,
            activation="gelu",
            batch_first=True,
            norm_first=True,
        )
        self.decoder = nn.TransformerDecoder(
            decoder_layer, config.decoder_layers, norm=nn.LayerNorm(width)
        )
        # untied from the input embedding
        self.head = nn.Linear(width, config.vocab_size)
        self._reset_parameters()

    def _reset_parameters(self) -> None:
        for embedding in (self.embed, self.encoder_positions, self.decoder_positions):
            nn.init.normal_(embedding.weight, std=0.02)
        # near-zero logits: the untrained model starts close to uniform
        nn.init.normal_(self.head.weight, std=0.01)
        nn.init.zeros_(self.head.bias)

    def encode(
        self, input_ids: torch.Tensor, input_padding: torch.Tensor | None = None
    ) -> torch.Tensor:
        length = input_ids.size(1)
        if length > self.config.max_input_tokens:
            raise SequenceTooLongError(
                f"input of {length} tokens exceeds {self.config.max_input_tokens}"
            )
        positions = torch.arange(length, device=input_ids.device)
        hidden = self.embed(input_ids) + self.encoder_positions(positions)
        return self.encoder(hidden, src_key_padding_mask=input_padding)

    def decode(
        self,
        memory: torch.Tensor,
        decoder_ids: torch.Tensor,
        memory_padding: torch.Tensor | None = None,
        decoder_padding: torch.Tensor | None = None,
    ) -> torch.Tensor:
        length = decoder_ids.size(1)
        if length > self.config.max_output_tokens:
            raise SequenceTooLongError(
                f"output of {length} tokens exceeds {self.config.max_output_tokens}"
            )
        positions = torch.arange(length, device=decoder_ids.device)
        hidden = self.embed(decoder_ids) + self.decoder_positions(positions)
        causal = torch.triu(
            torch.ones(length, length, dtype=torch.bool, device=decoder_ids.device),
            diagonal=1,
        )
        hidden = self.decoder(
            hidden,
            memory,
            tgt_mask=causal,
            tgt_key_padding_mask=decoder_padding,
            memory_key_padding_mask=memory_padding,
        )
        return self.head(hidden)

    def forward(
        self,
        input_ids: torch.Tensor,
        decoder_ids: torch.Tensor,
        input_padding: torch.Tensor | None = None,
        decoder_padding: torch.Tensor | None = None,
    ) -> torch.Tensor:
        memory = self.encode(input_ids, input_padding)
        return self.decode(memory, decoder_ids, input_padding, decoder_padding)


def build_model(config: ModelConfig) -> LanguageDecisionModel:
    with torch.random.fork_rng():
        torch.manual_seed(config.init_seed)
        return LanguageDecisionModel(config)
