from .db import Database, discover_migrations, split_sql_statements

__all__ = ["Database", "discover_migrations", "split_sql_statements"]
