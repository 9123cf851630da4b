# Точка входа: python fivebar.py <команда> ...
from app.main import main

if __name__ == "__main__":
    raise SystemExit(main())
