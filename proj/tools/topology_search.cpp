#include <cstdio>
#include <exception>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "affem/simbench.hpp"
#include "topology_search.hpp"

namespace {

const char* const kNames[] = {"Action", "Color", "Shape", "Size", "ObjVel", "HandVel", "Contact", "Distance"};

void print(const affem::topology::Candidate& c) {
    std::printf("  cards");
    for (int r : c.cards) std::printf(" %d", r);
    std::printf("  arcs");
    for (const auto& [p, ch] : c.arcs) std::printf(" %s->%s", kNames[p], kNames[ch]);
    std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Enumerate affordance layouts matching a parameter count"};
    std::size_t dof = 125, arcs = 10, in_degree = 3, show = 5;
    app.add_option("--dof", dof, "target degrees of freedom");
    app.add_option("--arcs", arcs, "arc count")->check(CLI::Range(4, 21));
    app.add_option("--max-in-degree", in_degree, "largest parent set");
    app.add_option("--show", show, "preferred layouts to print");
    CLI11_PARSE(app, argc, argv);

    try {
        std::size_t total = 0, smallest = std::numeric_limits<std::size_t>::max();
        affem::topology::enumerate(dof, arcs, in_degree, [&](const auto& c) {
            ++total;
            smallest = std::min(smallest, c.largest_cpt);
        });
        std::printf("%zu layouts with %zu arcs and %zu free parameters\n", total, arcs, dof);
        if (total == 0) return 1;
        std::printf("smallest largest CPT: %zu entries\n", smallest);

        std::size_t preferred = 0;
        affem::topology::enumerate(dof, arcs, in_degree, [&](const auto& c) {
            if (!affem::topology::preferred(c, smallest)) return;
            if (preferred++ < show) print(c);
        });
        std::printf("%zu preferred layouts\n", preferred);

        const auto frozen = affem::complex_network_spec();
        affem::Structure s(frozen);
        std::printf("frozen layout: %zu nodes, %zu arcs, %zu free parameters\n", s.size(), frozen.arcs.size(),
                    s.degrees_of_freedom());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
