from fkpp_nonlocal.cli import main
import sys
sys.exit(main())
