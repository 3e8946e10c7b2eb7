// placeholder, replaced in the FFI pass
