from typing import Optional, Union
from pathlib import Path
import pandas as pd

#: Round-trip exact formatting of 64-bit floats
FLOAT_FORMAT = "%.17g"


def filetype_from_suffix(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == '.csv':
        return 'csv'
    elif suffix == '.json':
        return 'json'
    else:
        return "unknown"


def sidecar_path(path: Union[str, Path], name: str = "diagnostics") -> Path:
    """ `<stem>.<name>.csv` next to `path` """
    path = Path(path)
    return path.with_name(f"{path.stem}.{name}.csv")


def save_frame(frame: pd.DataFrame, path: Union[str, Path],
               filetype: Optional[str] = None) -> Path:
    """Save a result table as csv or json

    Args:
        frame: The table. The index is not written.
        path: Destination, parent directories are created.
        filetype: 'csv' or 'json'. Deduced from the suffix if None.

    Returns:
        The path written to.

    Raises:
        ValueError: If the filetype is unknown.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    filetype = filetype_from_suffix(path) if filetype is None \
        else filetype.lower()
    if filetype == 'csv':
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    elif filetype == 'json':
        frame.to_json(path, orient='records', double_precision=15, indent=1)
    else:
        raise ValueError(f"Unknown filetype {filetype} for {path}")
    return path


def load_frame(path: Union[str, Path],
               filetype: Optional[str] = None) -> pd.DataFrame:
    path = Path(path)
    filetype = filetype_from_suffix(path) if filetype is None \
        else filetype.lower()
    if filetype == 'csv':
        return pd.read_csv(path)
    elif filetype == 'json':
        return pd.read_json(path, orient='records')
    else:
        raise ValueError(f"Unknown filetype {filetype} for {path}")
