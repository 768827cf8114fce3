"""One module per subcommand, each exposing ``register`` and ``run``."""
