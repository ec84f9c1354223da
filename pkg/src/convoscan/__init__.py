"""convoscan: conversational code-analysis orchestrator."""

__version__ = "0.1.0"
