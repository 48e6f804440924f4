"""secretsift: regex candidate extraction plus language-model classification of hardcoded secrets."""

__version__ = "0.1.0"
