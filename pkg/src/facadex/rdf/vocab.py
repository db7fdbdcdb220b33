RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
XSD = "http://www.w3.org/2001/XMLSchema#"
FX = "http://sparql.xyz/facade-x/ns/"
XYZ = "http://sparql.xyz/facade-x/data/"

RDF_TYPE = RDF + "type"
RDF_LANGSTRING = RDF + "langString"

XSD_STRING = XSD + "string"
XSD_BOOLEAN = XSD + "boolean"
XSD_INT = XSD + "int"
XSD_INTEGER = XSD + "integer"
XSD_DECIMAL = XSD + "decimal"
XSD_FLOAT = XSD + "float"
XSD_DOUBLE = XSD + "double"
XSD_BASE64 = XSD + "base64Binary"
XSD_DATE = XSD + "date"
XSD_DATETIME = XSD + "dateTime"

FX_ROOT = FX + "root"
FX_PROPERTIES = FX + "properties"
FX_ANYSLOT = FX + "anySlot"

SCHEME = "x-sparql-anything:"

DEFAULT_PREFIXES = {
    "rdf": RDF,
    "rdfs": RDFS,
    "xsd": XSD,
    "fx": FX,
    "xyz": XYZ,
}
