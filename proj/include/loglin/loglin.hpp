#pragma once

#include "loglin/hypergraph.hpp"
#include "loglin/inference.hpp"
#include "loglin/interaction.hpp"
#include "loglin/io.hpp"
#include "loglin/ipf.hpp"
#include "loglin/table.hpp"
#include "loglin/volumes.hpp"
