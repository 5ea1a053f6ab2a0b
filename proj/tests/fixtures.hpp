#pragma once

#include "gts/params.hpp"

namespace fixtures {

// Published Bitcoin and Ethereum estimates (percent log returns).
inline gts::gts_params btc() {
    return gts::validate_params(-0.121571, 0.315548, 0.406563, 0.747714, 0.544565, 0.246530, 0.174772);
}

inline gts::gts_params eth() {
    return gts::validate_params(-0.4854, 0.3904, 0.4045, 0.9582, 0.8005, 0.1667, 0.1708);
}

inline gts::gts_params symmetric() { return gts::validate_params(0.0, 0.4, 0.4, 0.8, 0.8, 0.2, 0.2); }

} // namespace fixtures
