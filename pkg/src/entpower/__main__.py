import sys

from src.entpower.cli.main import main

sys.exit(main())
