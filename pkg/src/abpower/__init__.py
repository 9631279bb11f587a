"""Power of two-sample A/B tests when treatment labels are corrupted by interference."""

__version__ = "0.1.0"
