# src/utils/utils.py
import os


def resolve_path(relative_path, base_file=None):
    """Resolve a path given in a config file against that file's directory."""
    if os.path.isabs(relative_path):
        return relative_path
    if base_file:
        base_path = os.path.dirname(os.path.abspath(base_file))
    else:
        base_path = os.getcwd()
    return os.path.join(base_path, relative_path)


def ensure_dir(path):
    """Create a directory (and parents) if it does not exist; return its absolute path."""
    path = os.path.abspath(path)
    if not os.path.exists(path):
        os.makedirs(path)
    return path
