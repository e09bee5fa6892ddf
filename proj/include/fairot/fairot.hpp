#pragma once

#include "fairot/datagen.hpp"
#include "fairot/density.hpp"
#include "fairot/error.hpp"
#include "fairot/ingest.hpp"
#include "fairot/lp_oracle.hpp"
#include "fairot/metrics.hpp"
#include "fairot/model.hpp"
#include "fairot/model_io.hpp"
#include "fairot/parallel.hpp"
#include "fairot/repair.hpp"
#include "fairot/rng.hpp"
#include "fairot/textio.hpp"
#include "fairot/transport.hpp"
