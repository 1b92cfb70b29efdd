__version__ = "0.1.0"
ENGINE_VERSION = f"gammacross-{__version__}"
