use ldx_core::rdf::{parse_ntriples_str, Graph, RdfTriple};

/// The ten-triple music graph; `http://x/` is the data namespace.
pub const G_MUSIC_NT: &str = "\
<http://x/Work> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .
<http://x/Album> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://x/Work> .
<http://x/Single> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://x/Work> .
<http://x/a1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Album> .
<http://x/a2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Album> .
<http://x/s1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Single> .
<http://x/a1> <http://x/artist> <http://x/bob> .
<http://x/a2> <http://x/artist> <http://x/bob> .
<http://x/a1> <http://x/name> \"A1\" .
<http://x/bob> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/Person> .
";

/// `http://x/{local}`.
pub fn ex(local: &str) -> String {
    format!("http://x/{local}")
}

pub fn g_music_triples() -> Vec<RdfTriple> {
    parse_ntriples_str(G_MUSIC_NT).expect("fixture parses")
}

pub fn g_music() -> Graph {
    Graph::build(g_music_triples())
}
