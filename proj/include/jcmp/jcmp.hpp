#pragma once

// Umbrella header for the numerical library.

#include "jcmp/dressed.hpp"
#include "jcmp/error.hpp"
#include "jcmp/hilbert.hpp"
#include "jcmp/kerr.hpp"
#include "jcmp/liouville.hpp"
#include "jcmp/qsd.hpp"
#include "jcmp/spectrum.hpp"
#include "jcmp/stats.hpp"
#include "jcmp/version.hpp"
#include "jcmp/wigner.hpp"
