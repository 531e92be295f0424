import logging

from src.infrastructure.config.settings import get_settings
from src.infrastructure.adapters.input.cli.cli import parcap


# Get application settings
settings = get_settings()

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)


def main() -> None:
    logger.debug(f"Starting {settings.APP_NAME} {settings.APP_VERSION}")
    parcap(prog_name=settings.APP_NAME)


if __name__ == "__main__":
    main()
