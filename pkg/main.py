import logging
import sys

from app.service.cli import main
from config.config import settings

logging.basicConfig(
    level=settings.log_level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)


if __name__ == "__main__":
    logger.info("Starting adapted-bubbles Helmholtz run...")
    sys.exit(main())
