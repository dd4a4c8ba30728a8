import logging

_FORMAT = "%(levelname)s %(name)s: %(message)s"


def config_logging(verbose: bool):
    """DEBUG level in verbose mode, INFO otherwise."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=_FORMAT,
        force=True,
    )


def get_script_logger(name):
    if name.endswith(".py"):
        name = name[:-3]
    logger = logging.getLogger(f"lumipower.{name}")
    return logger
