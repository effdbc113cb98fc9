"""tirforge: generate tool-integrated reasoning traces for math problems and
back-translate them into tool-free natural-language training data."""

__version__ = "0.1.0"
