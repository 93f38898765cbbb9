#pragma once

#include "helson/errors.hpp"
#include "helson/sieve.hpp"
#include "helson/sequence.hpp"
#include "helson/dilation.hpp"
#include "helson/io.hpp"
#include "helson/symbol.hpp"
#include "helson/helson_matrix.hpp"
#include "helson/spectral.hpp"
#include "helson/compact_approx.hpp"
#include "helson/weak_product.hpp"
