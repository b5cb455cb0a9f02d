#pragma once

// umbrella header

#include "frontlab/birth.hpp"
#include "frontlab/charroots.hpp"
#include "frontlab/config.hpp"
#include "frontlab/heteroclinic.hpp"
#include "frontlab/io.hpp"
#include "frontlab/numerics.hpp"
#include "frontlab/pdecheck.hpp"
#include "frontlab/profile.hpp"
#include "frontlab/version.hpp"
#include "frontlab/wavefront.hpp"
