var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var c = ee.ImageCollection('C').filter(ee.Filter.eq('k', '/*v*/')).first();

var t = `line // kept ${ee.Number(1).add(2) /* inner */} /* kept */`;
if (x) { /* empty */ } else { print('a/*b*/c'); }
var q = a / b / c; // divisions, not regexes

return_ = [1, 2].map(function (v) { return v / 2; /* half */ });
var tpl = `a${`nested ${'//'} tpl`}b`; // nested template
var t = `line // kept ${ee.Number(1).add(2) /* inner */} /* kept */`;
var tpl = `a${`nested ${'//'} tpl`}b`; // nested template
var s3 = 'it\'s // fine'; // escaped quote
// standalone comment 55
var fc = ee.FeatureCollection('F') /* first */ /* second */ .limit(5);
