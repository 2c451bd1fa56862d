"""Framework importers/exporters and the conversion hub."""

from netforge.frontends.caffe import (
    CaffeImport,
    export_caffe,
    import_caffe,
    import_caffe_detailed,
)
from netforge.frontends.convert import (
    canonical_params,
    convert,
    export_model,
    import_model,
    isomorphic,
)
from netforge.frontends.keras import (
    KerasImport,
    export_keras,
    import_keras,
    import_keras_detailed,
)
from netforge.frontends.names import check_bijective, framework_type_name, ir_type_name
from netforge.frontends.padding import CUSTOM, SAME, VALID, resolve_padding, same_total

__all__ = [
    "CaffeImport", "export_caffe", "import_caffe", "import_caffe_detailed",
    "canonical_params", "convert", "export_model", "import_model", "isomorphic",
    "KerasImport", "export_keras", "import_keras", "import_keras_detailed",
    "check_bijective", "framework_type_name", "ir_type_name",
    "CUSTOM", "SAME", "VALID", "resolve_padding", "same_total",
]
