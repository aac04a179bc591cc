#define TOML_EXCEPTIONS 1
#define TOML_HEADER_ONLY 0
#define TOML_IMPLEMENTATION
#include <toml.hpp>
