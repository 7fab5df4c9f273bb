#ifndef GAZEFILT_GAZEFILT_HPP
#define GAZEFILT_GAZEFILT_HPP

#include "gazefilt/errors.hpp"
#include "gazefilt/fft.hpp"
#include "gazefilt/filters.hpp"
#include "gazefilt/io.hpp"
#include "gazefilt/kinematics.hpp"
#include "gazefilt/spectral.hpp"
#include "gazefilt/stats.hpp"

#endif // GAZEFILT_GAZEFILT_HPP
