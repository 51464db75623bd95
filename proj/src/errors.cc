#include "symvar/errors.hpp"
