#pragma once

#include "gts/error.hpp"
#include "gts/params.hpp"
#include "gts/exponent.hpp"
#include "gts/fft.hpp"
#include "gts/spectral.hpp"
#include "gts/quantile.hpp"
#include "gts/returns.hpp"
#include "gts/special.hpp"
#include "gts/estimation.hpp"
#include "gts/qq.hpp"
