from .harness.cli import main
import sys

sys.exit(main())
